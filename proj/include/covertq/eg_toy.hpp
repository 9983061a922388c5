// Copyright 2026 The covertq Authors
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

#ifndef COVERTQ__EG_TOY_HPP_
#define COVERTQ__EG_TOY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "covertq/channels.hpp"
#include "covertq/covert_sim.hpp"
#include "covertq/divergences.hpp"
#include "covertq/error.hpp"
#include "covertq/operator_core.hpp"
#include "covertq/rng.hpp"

// Dense execution of the entanglement-generation protocol at toy scale.
//
// Pure states on a bipartite space X (x) Y are stored as dim X by dim Y
// matrices ("bipartite matrices"), entry (x, y) holding the amplitude of
// |x>|y>. Kronecker products of bipartite matrices then group all X factors
// before all Y factors, which is how B^n and W^n are separated.

namespace covertq
{

enum class EGDecoder
{
  /// Threshold square-root measurement when supp(sigma1) is in supp(sigma0),
  /// pretty-good measurement on the codeword states otherwise.
  Auto,
  Threshold,
  PrettyGood,
};

enum class DecouplingTarget
{
  /// Purification of omega_alpha^(x)n.
  Ideal,
  /// Purification of the bin-averaged warden state; decoupling is exact when
  /// all bins look alike to the warden.
  Self,
};

inline constexpr std::size_t kDefaultEGBudget = std::size_t{1} << 22;

struct EGConfig
{
  int n = 4;
  int t_dim = 2;
  int l_size = 2;
  double gamma = 1.0;
  std::uint64_t seed = 42;
  EGDecoder decoder = EGDecoder::Auto;
  DecouplingTarget target = DecouplingTarget::Ideal;
  std::optional<double> a_threshold{};
  std::size_t max_dim = kDefaultEGBudget;

  double alpha() const {return gamma / std::sqrt(static_cast<double>(n));}

  void validate() const
  {
    if (n < 1 || t_dim < 1 || l_size < 1) {
      throw Error(ErrorKind::InvalidParameter, "n, T and |L| must be positive");
    }
    const double a = alpha();
    if (!(a >= 0.0 && a <= 1.0)) {
      throw Error(ErrorKind::InvalidParameter, "alpha = gamma / sqrt(n) must lie in [0, 1]");
    }
  }
};

/// Quantum code: classical words x(m, l) stored at m * |L| + l, encoder
/// phases t(m, l), decoder phases h(m, l).
struct EGToyCode
{
  int n = 0;
  int t_dim = 0;
  int l_size = 0;
  double alpha = 0.0;
  std::vector<Word> words;
  std::vector<double> encode_phases;
  std::vector<double> decode_phases;
  int chosen_j = 0;

  std::size_t index(int m, int l) const
  {
    if (m < 0 || m >= t_dim || l < 0 || l >= l_size) {
      throw Error(ErrorKind::IndexOutOfRange, "quantum codeword index out of range");
    }
    return static_cast<std::size_t>(m) * static_cast<std::size_t>(l_size) + static_cast<std::size_t>(l);
  }

  const Word & word(int m, int l) const {return words[index(m, l)];}

  std::size_t size() const {return words.size();}

  void validate() const
  {
    if (n < 1 || t_dim < 1 || l_size < 1) {
      throw Error(ErrorKind::InvalidParameter, "n, T and |L| must be positive");
    }
    const std::size_t count = static_cast<std::size_t>(t_dim) * static_cast<std::size_t>(l_size);
    if (words.size() != count || encode_phases.size() != count || decode_phases.size() != count) {
      throw Error(ErrorKind::DimMismatch, "code needs T * |L| words and phases");
    }
    for (const auto & w : words) {
      if (w.size() != static_cast<std::size_t>(n)) {
        throw Error(ErrorKind::DimMismatch, "codeword length differs from n");
      }
      for (auto bit : w) {
        if (bit > 1) {
          throw Error(ErrorKind::InvalidParameter, "codeword entries must be 0 or 1");
        }
      }
    }
    for (std::size_t k = 0; k < count; ++k) {
      if (!std::isfinite(encode_phases[k]) || !std::isfinite(decode_phases[k])) {
        throw Error(ErrorKind::InvalidParameter, "phases must be finite");
      }
    }
    if (chosen_j < 0 || chosen_j >= t_dim) {
      throw Error(ErrorKind::IndexOutOfRange, "chosen j outside [0, T)");
    }
  }
};

/// Code with zero phases from explicit words.
inline EGToyCode make_eg_code(int n, int t_dim, int l_size, std::vector<Word> words, double alpha = 0.0)
{
  EGToyCode code;
  code.n = n;
  code.t_dim = t_dim;
  code.l_size = l_size;
  code.alpha = alpha;
  code.words = std::move(words);
  code.encode_phases.assign(code.words.size(), 0.0);
  code.decode_phases.assign(code.words.size(), 0.0);
  code.validate();
  return code;
}

/// Bernoulli(alpha) words conditioned on being pairwise distinct: word
/// (m, l) is redrawn with attempt counter 0, 1, ... until it is new. The
/// draws use CounterRng keyed by (attempt, m, l, position).
inline EGToyCode sample_eg_code(const EGConfig & cfg)
{
  cfg.validate();
  const std::size_t count = static_cast<std::size_t>(cfg.t_dim) * static_cast<std::size_t>(cfg.l_size);
  if (cfg.n < 63 && (std::uint64_t{1} << cfg.n) < count) {
    throw Error(ErrorKind::InvalidParameter, "fewer than T * |L| distinct words of length n exist");
  }
  const CounterRng rng(cfg.seed);
  std::set<Word> used;
  std::vector<Word> words;
  constexpr std::uint64_t max_attempts = 100000;
  for (int m = 0; m < cfg.t_dim; ++m) {
    for (int l = 0; l < cfg.l_size; ++l) {
      bool placed = false;
      for (std::uint64_t attempt = 0; attempt < max_attempts && !placed; ++attempt) {
        Word w(static_cast<std::size_t>(cfg.n));
        for (int i = 0; i < cfg.n; ++i) {
          const double u = rng.uniform(
            {attempt, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(i)});
          w[static_cast<std::size_t>(i)] = u < cfg.alpha() ? 1 : 0;
        }
        if (used.insert(w).second) {
          words.push_back(std::move(w));
          placed = true;
        }
      }
      if (!placed) {
        throw Error(ErrorKind::InvalidParameter, "could not draw distinct codewords; raise gamma or n");
      }
    }
  }
  return make_eg_code(cfg.n, cfg.t_dim, cfg.l_size, std::move(words), cfg.alpha());
}

/// Index of a word in the computational basis of A^n (first letter most
/// significant, matching the tensor order).
inline Index word_index(const Word & w)
{
  Index idx = 0;
  for (auto bit : w) {
    idx = 2 * idx + bit;
  }
  return idx;
}

/// |phi_m> = |L|^{-1/2} sum_l e^{i t(m,l)} |x(m,l)> on A^n.
inline std::vector<PureState> build_quantum_codewords(const EGToyCode & code)
{
  code.validate();
  const Index dim = Index{1} << code.n;
  std::vector<PureState> out;
  const double norm = 1.0 / std::sqrt(static_cast<double>(code.l_size));
  for (int m = 0; m < code.t_dim; ++m) {
    std::set<Word> seen;
    Vector amps = Vector::Zero(dim);
    for (int l = 0; l < code.l_size; ++l) {
      const Word & w = code.word(m, l);
      if (!seen.insert(w).second) {
        throw Error(ErrorKind::DuplicateWord, "a codeword repeats within message " + std::to_string(m));
      }
      amps(word_index(w)) = norm * std::polar(1.0, code.encode_phases[code.index(m, l)]);
    }
    out.emplace_back(std::move(amps));
  }
  return out;
}

/// Column x of V reshaped to a dim B by dim W bipartite matrix.
inline Matrix isometry_column(const StinespringIsometry & iso, Index x)
{
  if (x < 0 || x >= iso.in_dim()) {
    throw Error(ErrorKind::IndexOutOfRange, "input symbol out of range");
  }
  const Index db = iso.out_dim_b();
  const Index dw = iso.out_dim_w();
  Matrix out(db, dw);
  for (Index b = 0; b < db; ++b) {
    for (Index w = 0; w < dw; ++w) {
      out(b, w) = iso.matrix()(b * dw + w, x);
    }
  }
  return out;
}

/// V^(x)n |x^n> as a B^n by W^n bipartite matrix.
inline Matrix channel_output(const Word & w, const StinespringIsometry & iso)
{
  const Matrix v0 = isometry_column(iso, 0);
  const Matrix v1 = isometry_column(iso, 1);
  Matrix out = Matrix::Ones(1, 1);
  for (auto bit : w) {
    out = tensor(out, bit ? v1 : v0);
  }
  return out;
}

namespace detail
{

inline Index int_power(Index base, int n)
{
  Index out = 1;
  for (int i = 0; i < n; ++i) {
    out *= base;
  }
  return out;
}

inline void require_eg_budget(const EGToyCode & code, const StinespringIsometry & iso, std::size_t cap)
{
  if (iso.in_dim() < 2) {
    throw Error(ErrorKind::DimMismatch, "protocol needs a channel with at least two input symbols");
  }
  // T^3 dim(B)^n dim(W)^n |L|, the size of the full protocol state.
  long double dim = static_cast<long double>(code.t_dim) * code.t_dim * code.t_dim * code.l_size;
  for (int i = 0; i < code.n; ++i) {
    dim *= static_cast<long double>(iso.out_dim_b()) * static_cast<long double>(iso.out_dim_w());
  }
  if (dim > static_cast<long double>(cap)) {
    throw Error(
      ErrorKind::BudgetExceeded,
      "protocol state dimension " + std::to_string(static_cast<double>(dim)) + " exceeds the budget " +
      std::to_string(cap));
  }
}

// Dense pieces shared by every stage of the protocol.
struct EGContext
{
  Index dbn = 1;
  Index dwn = 1;
  int t_dim = 1;
  int l_size = 1;
  std::vector<Matrix> word_outputs;     // per (m, l): V^(x)n |x(m,l)>
  std::vector<Matrix> message_outputs;  // per m: V^(x)n |phi_m>
  std::vector<Matrix> sqrt_povm;        // per (m', l'), abstain folded into (0, 0)
};

inline EGContext make_context(
  const EGToyCode & code, const StinespringIsometry & iso, const Povm & povm, std::size_t cap,
  const Tolerances & tol)
{
  code.validate();
  require_eg_budget(code, iso, cap);
  EGContext ctx;
  ctx.dbn = int_power(iso.out_dim_b(), code.n);
  ctx.dwn = int_power(iso.out_dim_w(), code.n);
  ctx.t_dim = code.t_dim;
  ctx.l_size = code.l_size;
  if (povm.elements.size() != code.size()) {
    throw Error(ErrorKind::DimMismatch, "POVM needs one element per codeword");
  }
  const double norm = 1.0 / std::sqrt(static_cast<double>(code.l_size));
  for (const auto & w : code.words) {
    ctx.word_outputs.push_back(channel_output(w, iso));
  }
  for (int m = 0; m < code.t_dim; ++m) {
    Matrix phi = Matrix::Zero(ctx.dbn, ctx.dwn);
    for (int l = 0; l < code.l_size; ++l) {
      const std::size_t k = code.index(m, l);
      phi += norm * std::polar(1.0, code.encode_phases[k]) * ctx.word_outputs[k];
    }
    ctx.message_outputs.push_back(std::move(phi));
  }
  for (std::size_t k = 0; k < povm.elements.size(); ++k) {
    if (povm.elements[k].rows() != ctx.dbn) {
      throw Error(ErrorKind::DimMismatch, "POVM acts on the wrong space");
    }
    Matrix e = povm.elements[k];
    if (k == 0) {
      e += povm.abstain;
    }
    ctx.sqrt_povm.push_back(sqrt_psd(hermitian_part(e, 1e-8), tol));
  }
  return ctx;
}

inline Complex frobenius_inner(const Matrix & a, const Matrix & b)
{
  return (a.conjugate().array() * b.array()).sum();
}

inline double pure_trace_distance(Complex overlap)
{
  return 2.0 * std::sqrt(std::max(0.0, 1.0 - std::norm(overlap)));
}

}  // namespace detail

/// Receiver marginals (sigma0, sigma1) of a dilation, without the covert
/// support checks; the noiseless channel, for instance, fails them.
inline std::pair<Matrix, Matrix> receiver_letters(const StinespringIsometry & iso)
{
  return {marginal_outputs(iso, 0).bob.matrix(), marginal_outputs(iso, 1).bob.matrix()};
}

/// Decoding POVM on B^n, one element per codeword in code order.
inline Povm eg_decoder_povm(
  const EGToyCode & code, const StinespringIsometry & iso, EGDecoder mode = EGDecoder::Auto,
  std::optional<double> a_threshold = std::nullopt, const Tolerances & tol = {})
{
  code.validate();
  const auto [s0, s1] = receiver_letters(iso);
  if (mode == EGDecoder::Auto) {
    mode = support_included(s1, s0, tol) ? EGDecoder::Threshold : EGDecoder::PrettyGood;
  }
  if (mode == EGDecoder::Threshold) {
    const double d = qre(DensityOperator::unchecked(s1), DensityOperator::unchecked(s0), tol).to_double();
    const double a = a_threshold.value_or(0.5 * code.alpha * code.n * d);
    return square_root_measurement(
      threshold_projectors(code.words, s0, s1, a, std::numeric_limits<std::size_t>::max(), tol), tol);
  }
  std::vector<Matrix> states;
  for (const auto & w : code.words) {
    states.push_back(product_state(w, s0, s1));
  }
  return square_root_measurement(states, tol);
}

/// D = sum_{m,l} sqrt(Lambda_{m,l}) (x) |m>|l> from B^n to B^n M^ L^, rows
/// ordered (b, m, l). The abstain remainder joins outcome (0, 0) so D is an
/// isometry.
inline Matrix coherent_povm_isometry(const Povm & povm, const Tolerances & tol = {})
{
  if (povm.elements.empty()) {
    throw Error(ErrorKind::InvalidParameter, "empty POVM");
  }
  const Index d = povm.elements.front().rows();
  const Index k_count = static_cast<Index>(povm.elements.size());
  Matrix out = Matrix::Zero(d * k_count, d);
  for (Index k = 0; k < k_count; ++k) {
    Matrix e = povm.elements[static_cast<std::size_t>(k)];
    if (k == 0) {
      e += povm.abstain;
    }
    const Matrix root = sqrt_psd(hermitian_part(e, 1e-8), tol);
    for (Index b = 0; b < d; ++b) {
      out.row(b * k_count + k) = root.row(b);
    }
  }
  return out;
}

/// tau on R (x) M (x) B^n (x) W^n (x) M^ (x) L^, in that order.
inline PureState protocol_state(
  const EGToyCode & code, const StinespringIsometry & iso, const Povm & povm,
  std::size_t max_dim = kDefaultEGBudget, const Tolerances & tol = {})
{
  const auto ctx = detail::make_context(code, iso, povm, max_dim, tol);
  const Index t = ctx.t_dim;
  const Index kl = static_cast<Index>(ctx.sqrt_povm.size());
  const Index block = ctx.dbn * ctx.dwn * kl;
  Vector amps = Vector::Zero(t * t * block);
  const double norm = 1.0 / std::sqrt(static_cast<double>(t));
  for (Index m = 0; m < t; ++m) {
    const Index base = (m * t + m) * block;
    for (Index k = 0; k < kl; ++k) {
      const Matrix branch = ctx.sqrt_povm[static_cast<std::size_t>(k)] * ctx.message_outputs[static_cast<std::size_t>(m)];
      for (Index b = 0; b < ctx.dbn; ++b) {
        for (Index w = 0; w < ctx.dwn; ++w) {
          amps(base + (b * ctx.dwn + w) * kl + k) = norm * branch(b, w);
        }
      }
    }
  }
  Tolerances loose = tol;
  loose.trace = std::max(loose.trace, 1e-8);
  return PureState(std::move(amps), loose);
}

struct PhaseAlignment
{
  std::vector<double> encode_phases;
  std::vector<double> decode_phases;
  /// <eta|tau> with the aligned decoder phases and with h = 0.
  Complex aligned_overlap;
  Complex zero_phase_overlap;
};

namespace detail
{

// Blocks of |eta~_m> or |tau~_m> on B^n W^n M^ L^: one B^n by W^n matrix per
// decoder outcome k = (m', l').
inline std::vector<Matrix> tau_blocks(const EGContext & ctx, int m)
{
  std::vector<Matrix> out;
  for (const auto & root : ctx.sqrt_povm) {
    out.push_back(root * ctx.message_outputs[static_cast<std::size_t>(m)]);
  }
  return out;
}

inline std::vector<Matrix> eta_blocks(const EGContext & ctx, const EGToyCode & code, int m, const std::vector<double> & h)
{
  const double norm = 1.0 / std::sqrt(static_cast<double>(ctx.l_size));
  std::vector<Matrix> out(ctx.sqrt_povm.size(), Matrix::Zero(ctx.dbn, ctx.dwn));
  for (int l = 0; l < ctx.l_size; ++l) {
    const std::size_t k = code.index(m, l);
    out[k] = norm * std::polar(1.0, h[k]) * ctx.word_outputs[k];
  }
  return out;
}

inline Complex blocks_inner(const std::vector<Matrix> & a, const std::vector<Matrix> & b)
{
  Complex acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    acc += frobenius_inner(a[k], b[k]);
  }
  return acc;
}

inline Complex global_overlap(const EGContext & ctx, const EGToyCode & code, const std::vector<double> & h)
{
  Complex acc = 0.0;
  for (int m = 0; m < ctx.t_dim; ++m) {
    acc += blocks_inner(eta_blocks(ctx, code, m, h), tau_blocks(ctx, m));
  }
  return acc / static_cast<double>(ctx.t_dim);
}

}  // namespace detail

/// Keeps t and sets h(m,l) = t(m,l) + arg <x(m,l)| sqrt(Lambda_{m,l}) (x) 1 |x(m,l)>,
/// which makes every per-term overlap real and nonnegative.
inline PhaseAlignment align_phases(
  const EGToyCode & code, const StinespringIsometry & iso, const Povm & povm,
  std::size_t max_dim = kDefaultEGBudget, const Tolerances & tol = {})
{
  const auto ctx = detail::make_context(code, iso, povm, max_dim, tol);
  PhaseAlignment out;
  out.encode_phases = code.encode_phases;
  out.decode_phases.resize(code.size());
  for (std::size_t k = 0; k < code.size(); ++k) {
    const Matrix & x = ctx.word_outputs[k];
    const Complex raw = detail::frobenius_inner(x, ctx.sqrt_povm[k] * x);
    out.decode_phases[k] = code.encode_phases[k] + (std::abs(raw) > 0.0 ? std::arg(raw) : 0.0);
  }
  out.aligned_overlap = detail::global_overlap(ctx, code, out.decode_phases);
  out.zero_phase_overlap = detail::global_overlap(ctx, code, std::vector<double>(code.size(), 0.0));
  return out;
}

struct UhlmannResult
{
  /// dim C by dim B isometry W maximizing |<theta| (1 (x) W) |psi>|.
  Matrix isometry;
  /// The maximum, equal to the root fidelity of the A marginals.
  double overlap = 0.0;
};

/// psi and theta as bipartite matrices (A by B and A by C). With
/// X = theta^dagger psi = U S V^dagger, W = conj(U_1) V^T where U_1 holds the
/// first dim B left singular vectors; then tr(W^T X) = ||X||_1.
inline UhlmannResult uhlmann_isometry(const Matrix & psi, const Matrix & theta)
{
  if (psi.rows() != theta.rows()) {
    throw Error(ErrorKind::DimMismatch, "purifications must share the A system");
  }
  if (theta.cols() < psi.cols()) {
    throw Error(
      ErrorKind::DimMismatch,
      "target system C (dim " + std::to_string(theta.cols()) + ") is smaller than B (dim " +
      std::to_string(psi.cols()) + "); pad C");
  }
  const Matrix x = theta.adjoint() * psi;
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix u1 = svd.matrixU().leftCols(psi.cols());
  UhlmannResult out;
  out.isometry = u1.conjugate() * svd.matrixV().transpose();
  out.overlap = svd.singularValues().sum();
  return out;
}

inline UhlmannResult uhlmann_isometry(const PureState & psi, Index dim_a_psi, const PureState & theta, Index dim_a_theta)
{
  const auto as_matrix = [](const Vector & v, Index rows) {
      if (rows < 1 || v.size() % rows != 0) {
        throw Error(ErrorKind::DimMismatch, "state dimension is not a multiple of dim A");
      }
      const Index cols = v.size() / rows;
      Matrix m(rows, cols);
      for (Index a = 0; a < rows; ++a) {
        for (Index b = 0; b < cols; ++b) {
          m(a, b) = v(a * cols + b);
        }
      }
      return m;
    };
  return uhlmann_isometry(as_matrix(psi.amplitudes(), dim_a_psi), as_matrix(theta.amplitudes(), dim_a_theta));
}

/// sum_i sqrt(lambda_i) |e_i>|e_i> as a bipartite matrix.
inline Matrix canonical_purification(const Matrix & rho, const Tolerances & tol = {})
{
  const auto eig = eigh(rho, tol);
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (Index i = 0; i < eig.values.size(); ++i) {
    if (eig.values(i) > 0.0) {
      out += std::sqrt(eig.values(i)) * eig.vectors.col(i) * eig.vectors.col(i).transpose();
    }
  }
  return out;
}

struct DecouplingResult
{
  /// Gamma^m from B^n L^ (rows b * |L| + l) to C = W~^n (x) P.
  std::vector<Matrix> gammas;
  /// Target purification on W^n (x) C, P in state |0>.
  Matrix target;
  Index pad_dim = 1;
  /// ||Delta tau - GHZ (x) target||_1 for the actual protocol state.
  double trace_distance_ghz = 0.0;
  /// Same distance for the approximation eta.
  double eta_trace_distance = 0.0;
  /// ||tau - eta||_1 before decoupling.
  double tau_eta_distance = 0.0;
  /// max_m ||rho_W^(m) - target_W||_1 and 2 sqrt of it.
  double max_bin_distance = 0.0;
  double secrecy_bound = 0.0;
  double isometry_defect = 0.0;
};

namespace detail
{

// Delta applied to per-m blocks: out[m^](c, w) for R = M = m.
inline std::vector<Matrix> apply_decoupler(
  const EGContext & ctx, const std::vector<Matrix> & blocks, const std::vector<Matrix> & gammas)
{
  const Index l = ctx.l_size;
  std::vector<Matrix> out;
  for (int mh = 0; mh < ctx.t_dim; ++mh) {
    Matrix y(ctx.dbn * l, ctx.dwn);
    for (Index li = 0; li < l; ++li) {
      const Matrix & blk = blocks[static_cast<std::size_t>(mh * l + li)];
      for (Index b = 0; b < ctx.dbn; ++b) {
        y.row(b * l + li) = blk.row(b);
      }
    }
    out.push_back(gammas[static_cast<std::size_t>(mh)] * y);
  }
  return out;
}

// <GHZ (x) target| (x) over all m of the decoupled blocks, scaled by 1/T.
inline Complex ghz_overlap(
  const EGContext & ctx, const std::vector<std::vector<Matrix>> & decoupled, const Matrix & target)
{
  Complex acc = 0.0;
  for (int m = 0; m < ctx.t_dim; ++m) {
    acc += frobenius_inner(target.transpose(), decoupled[static_cast<std::size_t>(m)][static_cast<std::size_t>(m)]);
  }
  return acc / static_cast<double>(ctx.t_dim);
}

}  // namespace detail

/// Builds Delta = sum_m |m><m| (x) Gamma^m from Uhlmann isometries between
/// eta_m (purifying the bin state rho_W^(m)) and the target purification.
inline DecouplingResult decoupling_decoder(
  const EGToyCode & code, const StinespringIsometry & iso, const Povm & povm,
  DecouplingTarget mode = DecouplingTarget::Ideal, std::size_t max_dim = kDefaultEGBudget,
  const Tolerances & tol = {})
{
  const auto ctx = detail::make_context(code, iso, povm, max_dim, tol);
  const Index l = ctx.l_size;
  const Index dbl = ctx.dbn * l;
  DecouplingResult out;
  out.pad_dim = (dbl + ctx.dwn - 1) / ctx.dwn;

  // psi_m: W^n by (B^n, L^).
  std::vector<Matrix> psis;
  const double norm = 1.0 / std::sqrt(static_cast<double>(l));
  for (int m = 0; m < ctx.t_dim; ++m) {
    Matrix psi = Matrix::Zero(ctx.dwn, dbl);
    for (Index li = 0; li < l; ++li) {
      const std::size_t k = code.index(m, static_cast<int>(li));
      const Matrix x = norm * std::polar(1.0, code.decode_phases[k]) * ctx.word_outputs[k];
      for (Index b = 0; b < ctx.dbn; ++b) {
        psi.col(b * l + li) = x.row(b).transpose();
      }
    }
    psis.push_back(std::move(psi));
  }

  Matrix target_w;
  if (mode == DecouplingTarget::Ideal) {
    const auto [o0, o1] = std::pair{marginal_outputs(iso, 0).willie.matrix(), marginal_outputs(iso, 1).willie.matrix()};
    const Matrix letter = canonical_purification((1.0 - code.alpha) * o0 + code.alpha * o1, tol);
    target_w = Matrix::Ones(1, 1);
    for (int i = 0; i < code.n; ++i) {
      target_w = tensor(target_w, letter);
    }
  } else {
    Matrix avg = Matrix::Zero(ctx.dwn, ctx.dwn);
    for (const auto & psi : psis) {
      avg += psi * psi.adjoint();
    }
    target_w = canonical_purification(avg / static_cast<double>(ctx.t_dim), tol);
  }
  out.target = Matrix::Zero(ctx.dwn, ctx.dwn * out.pad_dim);
  for (Index c = 0; c < ctx.dwn; ++c) {
    out.target.col(c * out.pad_dim) = target_w.col(c);
  }

  const Matrix target_marginal = out.target * out.target.adjoint();
  for (const auto & psi : psis) {
    auto u = uhlmann_isometry(psi, out.target);
    out.isometry_defect = std::max(
      out.isometry_defect,
      max_abs(u.isometry.adjoint() * u.isometry - Matrix::Identity(dbl, dbl)));
    out.gammas.push_back(std::move(u.isometry));
    out.max_bin_distance = std::max(out.max_bin_distance, trace_norm(psi * psi.adjoint() - target_marginal, tol));
  }
  out.secrecy_bound = 2.0 * std::sqrt(out.max_bin_distance);

  std::vector<std::vector<Matrix>> tau_out;
  std::vector<std::vector<Matrix>> eta_out;
  Complex tau_eta = 0.0;
  for (int m = 0; m < ctx.t_dim; ++m) {
    const auto tb = detail::tau_blocks(ctx, m);
    const auto eb = detail::eta_blocks(ctx, code, m, code.decode_phases);
    tau_eta += detail::blocks_inner(eb, tb);
    tau_out.push_back(detail::apply_decoupler(ctx, tb, out.gammas));
    eta_out.push_back(detail::apply_decoupler(ctx, eb, out.gammas));
  }
  out.tau_eta_distance = detail::pure_trace_distance(tau_eta / static_cast<double>(ctx.t_dim));
  out.trace_distance_ghz = detail::pure_trace_distance(detail::ghz_overlap(ctx, tau_out, out.target));
  out.eta_trace_distance = detail::pure_trace_distance(detail::ghz_overlap(ctx, eta_out, out.target));
  return out;
}

/// Fourier on M, outcome j kept, Z^{-j} on M^. Input on R (x) M (x) M^, output
/// on R (x) M^, renormalized. A zero-probability outcome throws.
inline Vector ghz_to_epr(const Vector & state, Index t_dim, Index j)
{
  if (t_dim < 1 || state.size() != t_dim * t_dim * t_dim) {
    throw Error(ErrorKind::DimMismatch, "state must live on three T-dimensional registers");
  }
  if (j < 0 || j >= t_dim) {
    throw Error(ErrorKind::IndexOutOfRange, "outcome j outside [0, T)");
  }
  const Matrix f = fourier_unitary(t_dim);
  Vector out = Vector::Zero(t_dim * t_dim);
  for (Index r = 0; r < t_dim; ++r) {
    for (Index mh = 0; mh < t_dim; ++mh) {
      Complex acc = 0.0;
      for (Index m = 0; m < t_dim; ++m) {
        acc += f(j, m) * state((r * t_dim + m) * t_dim + mh);
      }
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((j * mh) % t_dim) / static_cast<double>(t_dim);
      out(r * t_dim + mh) = std::polar(1.0, angle) * acc;
    }
  }
  const double norm = out.norm();
  if (!(norm > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "measurement outcome has zero probability");
  }
  return out / norm;
}

/// Outcome-averaged version: rho_{RM^} = sum_j K_j rho K_j^dagger with
/// K_j = Z^{-j}_{M^} <j|_M F_M. Trace preserving.
inline Matrix ghz_to_epr_channel(const Matrix & rho, Index t_dim)
{
  const Index d3 = t_dim * t_dim * t_dim;
  if (t_dim < 1 || rho.rows() != d3 || rho.cols() != d3) {
    throw Error(ErrorKind::DimMismatch, "state must live on three T-dimensional registers");
  }
  const Matrix f = fourier_unitary(t_dim);
  Matrix out = Matrix::Zero(t_dim * t_dim, t_dim * t_dim);
  for (Index j = 0; j < t_dim; ++j) {
    Matrix k = Matrix::Zero(t_dim * t_dim, d3);
    for (Index r = 0; r < t_dim; ++r) {
      for (Index mh = 0; mh < t_dim; ++mh) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>((j * mh) % t_dim) / static_cast<double>(t_dim);
        for (Index m = 0; m < t_dim; ++m) {
          k(r * t_dim + mh, (r * t_dim + m) * t_dim + mh) = std::polar(1.0, angle) * f(j, m);
        }
      }
    }
    out += k * rho * k.adjoint();
  }
  return out;
}

/// (1/sqrt T) sum_m |m>|m>|m>.
inline Vector ghz_state(Index t_dim)
{
  Vector v = Vector::Zero(t_dim * t_dim * t_dim);
  for (Index m = 0; m < t_dim; ++m) {
    v((m * t_dim + m) * t_dim + m) = 1.0 / std::sqrt(static_cast<double>(t_dim));
  }
  return v;
}

struct AssistanceResult
{
  int best_j = 0;
  std::vector<double> per_j_fidelity;
  double max_fidelity = 0.0;
  double mean_fidelity = 0.0;
  /// max_j ||F^j dagger F^j - I||, zero when the phi_m are orthonormal.
  double encoder_isometry_defect = 0.0;
};

/// F_j = <Phi| (id (x) D^j o N^(x)n o F^j)(Phi) |Phi> with encoder
/// F^j = sum_m e^{2 pi i j m / T} |phi_m><m| and decoder
/// D^j = Z^{-j} tr_C Delta D. Ties go to the lowest j.
inline AssistanceResult eliminate_assistance(
  const EGToyCode & code, const StinespringIsometry & iso, const Povm & povm, const DecouplingResult & dec,
  std::size_t max_dim = kDefaultEGBudget, const Tolerances & tol = {})
{
  const auto ctx = detail::make_context(code, iso, povm, max_dim, tol);
  const Index t = ctx.t_dim;
  AssistanceResult out;

  const auto codewords = build_quantum_codewords(code);
  Matrix overlaps(t, t);
  for (Index a = 0; a < t; ++a) {
    for (Index b = 0; b < t; ++b) {
      overlaps(a, b) = codewords[static_cast<std::size_t>(a)].amplitudes().dot(codewords[static_cast<std::size_t>(b)].amplitudes());
    }
  }
  // The j-phases are diagonal in m, so every encoder shares this Gram matrix.
  out.encoder_isometry_defect = max_abs(overlaps - Matrix::Identity(t, t));

  double best = -1.0;
  double total = 0.0;
  for (Index j = 0; j < t; ++j) {
    std::vector<std::vector<Matrix>> decoupled;
    for (Index m = 0; m < t; ++m) {
      const double enc = 2.0 * std::numbers::pi * static_cast<double>((j * m) % t) / static_cast<double>(t);
      auto blocks = detail::tau_blocks(ctx, static_cast<int>(m));
      for (auto & blk : blocks) {
        blk *= std::polar(1.0, enc);
      }
      auto dm = detail::apply_decoupler(ctx, blocks, dec.gammas);
      for (Index mh = 0; mh < t; ++mh) {
        const double corr = -2.0 * std::numbers::pi * static_cast<double>((j * mh) % t) / static_cast<double>(t);
        dm[static_cast<std::size_t>(mh)] *= std::polar(1.0, corr);
      }
      decoupled.push_back(std::move(dm));
    }
    // <Phi|_{R M^} contracts r = m^; the remaining (c, w) index the environment.
    Matrix env = Matrix::Zero(decoupled[0][0].rows(), decoupled[0][0].cols());
    for (Index m = 0; m < t; ++m) {
      env += decoupled[static_cast<std::size_t>(m)][static_cast<std::size_t>(m)];
    }
    env /= static_cast<double>(t);
    const double fid = std::clamp(env.squaredNorm(), 0.0, 1.0);
    out.per_j_fidelity.push_back(fid);
    total += fid;
    if (fid > best + 1e-12) {
      best = fid;
      out.best_j = static_cast<int>(j);
    }
  }
  out.max_fidelity = best;
  out.mean_fidelity = total / static_cast<double>(t);
  return out;
}

struct EGReport
{
  double fidelity = 0.0;
  double mean_fidelity = 0.0;
  int best_j = 0;
  std::vector<double> per_j_fidelity;
  double covert_divergence = 0.0;
  double trace_distance_ghz = 0.0;
  /// ||tau_W - rho_bar_W||_1 against the classical code's warden state.
  double willie_classical_gap = 0.0;
  std::vector<std::pair<std::string, double>> diagnostics;
};

/// Warden marginal of the protocol state, (1/T) sum_m tr_B |phi_m><phi_m|
/// after the channel.
inline Matrix protocol_willie_state(
  const EGToyCode & code, const StinespringIsometry & iso, std::size_t max_dim = kDefaultEGBudget)
{
  code.validate();
  detail::require_eg_budget(code, iso, max_dim);
  const double norm = 1.0 / std::sqrt(static_cast<double>(code.l_size));
  Matrix out;
  for (int m = 0; m < code.t_dim; ++m) {
    Matrix phi;
    for (int l = 0; l < code.l_size; ++l) {
      const std::size_t k = code.index(m, l);
      Matrix x = norm * std::polar(1.0, code.encode_phases[k]) * channel_output(code.words[k], iso);
      phi = l == 0 ? x : Matrix(phi + x);
    }
    const Matrix rho = phi.transpose() * phi.conjugate();
    out = m == 0 ? rho : Matrix(out + rho);
  }
  return out / static_cast<double>(code.t_dim);
}

/// Runs the whole protocol: decoder POVM, phase alignment, decoupling and
/// assistance elimination, with covertness of the warden marginal.
inline EGReport eg_report(
  EGToyCode code, const StinespringIsometry & iso, EGDecoder decoder = EGDecoder::Auto,
  DecouplingTarget target = DecouplingTarget::Ideal, std::optional<double> a_threshold = std::nullopt,
  std::size_t max_dim = kDefaultEGBudget, const Tolerances & tol = {})
{
  code.validate();
  detail::require_eg_budget(code, iso, max_dim);
  const Povm povm = eg_decoder_povm(code, iso, decoder, a_threshold, tol);
  const auto phases = align_phases(code, iso, povm, max_dim, tol);
  code.decode_phases = phases.decode_phases;
  const auto dec = decoupling_decoder(code, iso, povm, target, max_dim, tol);
  const auto assist = eliminate_assistance(code, iso, povm, dec, max_dim, tol);
  code.chosen_j = assist.best_j;

  EGReport r;
  r.fidelity = assist.max_fidelity;
  r.mean_fidelity = assist.mean_fidelity;
  r.best_j = assist.best_j;
  r.per_j_fidelity = assist.per_j_fidelity;
  r.trace_distance_ghz = dec.trace_distance_ghz;

  const Matrix tau_w = protocol_willie_state(code, iso, max_dim);
  const Matrix o0 = marginal_outputs(iso, 0).willie.matrix();
  const Matrix o1 = marginal_outputs(iso, 1).willie.matrix();
  const Matrix w0n = tensor_power(o0, code.n);
  r.covert_divergence = qre(DensityOperator::unchecked(tau_w), DensityOperator::unchecked(w0n), tol).to_double();
  Matrix rho_bar = Matrix::Zero(tau_w.rows(), tau_w.cols());
  for (const auto & w : code.words) {
    rho_bar += product_state(w, o0, o1);
  }
  rho_bar /= static_cast<double>(code.size());
  r.willie_classical_gap = trace_norm(tau_w - rho_bar, tol);

  const Matrix d = coherent_povm_isometry(povm, tol);
  std::vector<Matrix> states;
  const auto [s0, s1] = receiver_letters(iso);
  for (const auto & w : code.words) {
    states.push_back(product_state(w, s0, s1));
  }
  const auto decoder_errors = decoder_report(povm, states);

  r.diagnostics = {
    {"decoder_average_error", decoder_errors.average_error},
    {"decoder_max_error", decoder_errors.max_error},
    {"coherent_povm_isometry_defect", max_abs(d.adjoint() * d - Matrix::Identity(d.cols(), d.cols()))},
    {"decoupler_isometry_defect", dec.isometry_defect},
    {"encoder_isometry_defect", assist.encoder_isometry_defect},
    {"aligned_global_overlap", std::abs(phases.aligned_overlap)},
    {"zero_phase_global_overlap", std::abs(phases.zero_phase_overlap)},
    {"tau_eta_trace_distance", dec.tau_eta_distance},
    {"eta_decoupling_trace_distance", dec.eta_trace_distance},
    {"max_bin_secrecy_distance", dec.max_bin_distance},
    {"secrecy_bound", dec.secrecy_bound},
    {"willie_classical_gap", r.willie_classical_gap},
  };
  return r;
}

inline EGReport eg_report(const StinespringIsometry & iso, const EGConfig & cfg, const Tolerances & tol = {})
{
  cfg.validate();
  return eg_report(sample_eg_code(cfg), iso, cfg.decoder, cfg.target, cfg.a_threshold, cfg.max_dim, tol);
}

}  // namespace covertq

#endif  // COVERTQ__EG_TOY_HPP_
