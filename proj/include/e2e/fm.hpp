// Copyright 2026 The E2E Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef E2E_FM_HPP_
#define E2E_FM_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace e2e {

// Dense row-major matrix of doubles. Action chunks are K x d_a; feature
// layers are N x d. Deliberately minimal: the kernel verifies formulas, it
// does not chase throughput.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(size_t r, size_t c) { return data[r * cols + c]; }
  double at(size_t r, size_t c) const { return data[r * cols + c]; }

  static Matrix gaussian(size_t r, size_t c, uint64_t seed);

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// Exact-order pairwise tree reduction; the fixed association makes batch
// and step reductions bit-stable regardless of the producing schedule.
double pairwise_sum(const double* values, size_t n);
double pairwise_sum(const std::vector<double>& values);

// Stack of layer activations H^1..H^L, all N x d.
struct FeatureStack {
  enum class Source { kSynthetic, kFile };

  std::vector<Matrix> layers;
  Source source = Source::kSynthetic;

  size_t L() const { return layers.size(); }

  static FeatureStack synthetic(size_t L, size_t N, size_t d, uint64_t seed);
  static FeatureStack from_file(const std::string& path);  // JSON dump
  void to_file(const std::string& path) const;

  void validate() const;  // throws ShapeError unless all layers share N x d
};

struct ConditioningContext {
  const FeatureStack* features = nullptr;
  std::optional<std::vector<double>> proprio;  // carried, not consumed
  // Flow time. Training draws tau from (0,1]; the sampler also evaluates
  // the left endpoint tau = 0.
  double tau = 1.0;
};

// a_tilde = (1 - tau) * eps + tau * a, elementwise.
Matrix interpolate(const Matrix& eps, const Matrix& a, double tau);

// v = a - eps, elementwise; constant along the interpolation path.
Matrix velocity_target(const Matrix& eps, const Matrix& a);

// Mean over batch of the summed squared elementwise error. Reduction order
// is the pairwise tree in both directions.
double fm_loss(const std::vector<Matrix>& v_hat, const std::vector<Matrix>& v);

class VelocityPredictor {
 public:
  virtual ~VelocityPredictor() = default;
  virtual Matrix predict(const Matrix& a_tilde,
                         const ConditioningContext& ctx) const = 0;
};

// Returns a fixed field regardless of input; with field = a - eps the Euler
// integral is exact at any step count. Test-only.
class OracleConstant : public VelocityPredictor {
 public:
  explicit OracleConstant(Matrix field) : field_(std::move(field)) {}
  Matrix predict(const Matrix& a_tilde,
                 const ConditioningContext& ctx) const override;

 private:
  Matrix field_;
};

// Forward-only toy denoiser exercising the conditioning topologies: project
// actions to width d, add a tau-scaled bias, run M residual cross-attention
// blocks over the deepest M feature layers, project back. Weights are fixed
// seeded gaussians scaled small enough that 8 Euler steps stay close to a
// fine reference (no fidelity claim beyond the wiring).
class ToyDiT : public VelocityPredictor {
 public:
  ToyDiT(size_t d_a, size_t d, size_t M, uint64_t seed);

  Matrix predict(const Matrix& a_tilde,
                 const ConditioningContext& ctx) const override;

  size_t M() const { return m_; }

 private:
  size_t m_;
  Matrix w_in_;   // d_a x d
  std::vector<double> b_tau_;  // d
  Matrix w_out_;  // d x d_a
};

// Left-endpoint explicit Euler from seeded noise: x_0 = eps ~ N(0, I),
// x_{k+1} = eps + pairwise_sum(dtau * v_0 .. dtau * v_k). The prefix-tree
// accumulation makes results for a constant field bitwise identical across
// power-of-two step counts.
Matrix euler_sample(const VelocityPredictor& pred, ConditioningContext ctx,
                    int steps, size_t K, size_t d_a, uint64_t rng_seed);

// softmax(Q K^T / sqrt(d)) V with row-wise max-subtracted softmax.
Matrix cross_attention(const Matrix& q, const Matrix& k, const Matrix& v);

// Last-layer conditioning: Z = H^L.
const Matrix& groot_condition(const FeatureStack& stack);

// Layer-wise schedule: the deepest M layers, ascending, 1-based:
// [L-M+1, ..., L]. Throws ScheduleError unless 1 <= M <= L.
std::vector<size_t> pi_layer_schedule(size_t L, size_t M);

// u <- u + cross_attention(u, H^l, H^l) for each scheduled layer l in order.
// Identity projections; block i consumes layer L-M+i.
Matrix pi_forward(const Matrix& action_tokens, const FeatureStack& stack,
                  size_t M);

struct FmVerifyOptions {
  int steps = 8;
  size_t k = 16;
  size_t d_a = 7;
  uint64_t seed = 0;
};

// Runs the kernel property suite, prints one row per check, returns true
// iff everything passed. Output is deterministic (no timings).
bool run_fm_verify(const FmVerifyOptions& options, std::ostream& out);

}  // namespace e2e

#endif  // E2E_FM_HPP_
