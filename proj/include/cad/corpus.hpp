#pragma once

// Reference losses used by the gradient checks, the optimizer demos and the
// acceptance suite. Each entry pairs a tape-built loss with, where the
// operations allow it, the same loss written against the split-real backend.
//
//   abs2           sum_i |z_i|^2
//   rayleigh       Re<z, A z> / <z, z>, A fixed Hermitian
//   dft_energy     (1/N) sum_k w_k |DFT(z)_k|^2 + Re sum_n u_n IDFT(z)_n
//   inner_real     Re<z, w> + Im<z, w>
//   urnn_unrolled  sequence loss of a structured-unitary RNN, all parameters

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "cad/oracles/split_real.hpp"
#include "cad/rng.hpp"
#include "cad/tape.hpp"
#include "cad/urnn.hpp"

namespace cad::corpus {

inline constexpr std::array<std::string_view, 5> kLossIds{
    "abs2", "rayleigh", "dft_energy", "inner_real", "urnn_unrolled"};

// Real restriction: every input is a real-domain tensor and every op maps
// reals to reals.
enum class Restriction { None, Real };

struct CorpusLoss {
  std::string id;
  std::vector<Tensor> point;
  std::vector<std::string> names;
  LossBuilder build;
  std::optional<split::LossBuilder> split;
};

inline bool is_known(std::string_view id) {
  return std::find(kLossIds.begin(), kLossIds.end(), id) != kLossIds.end();
}

inline bool supports_real_restriction(std::string_view id) {
  return id == "abs2" || id == "rayleigh" || id == "inner_real";
}

namespace detail {

inline Tensor vector_point(std::size_t n, Rng& rng, Restriction r) {
  return r == Restriction::Real ? rng.real_vector(n) : rng.complex_vector(n);
}

inline Tensor hermitian(std::size_t n, Rng& rng, Restriction r) {
  const Tensor m = r == Restriction::Real ? rng.real_matrix(n, n)
                                          : rng.complex_matrix(n, n);
  const Tensor h = Complex(0.5) * (m + dagger(m));
  return r == Restriction::Real ? h.real_projection() : h;
}

inline CorpusLoss abs2(std::size_t n, Rng& rng, Restriction r) {
  CorpusLoss loss{"abs2", {vector_point(n, rng, r)}, {"z"}, {}, {}};
  loss.build = [](Tape&, std::span<const Var> v) {
    return sum(re(conj(v[0]) * v[0]));
  };
  loss.split = [](split::Tape&, std::span<const split::CTensor> v) {
    return split::sum(split::hadamard(split::conj(v[0]), v[0])).re;
  };
  return loss;
}

inline CorpusLoss rayleigh(std::size_t n, Rng& rng, Restriction r) {
  const Tensor a = hermitian(n, rng, r);
  CorpusLoss loss{"rayleigh", {vector_point(n, rng, r)}, {"z"}, {}, {}};
  loss.build = [a](Tape& t, std::span<const Var> v) {
    const Var& z = v[0];
    return re(inner(z, matmul(constant(t, a), z))) / re(inner(z, z));
  };
  loss.split = [a](split::Tape& t, std::span<const split::CTensor> v) {
    const split::CTensor& z = v[0];
    return split::inner(z, split::matmul(split::constant(t, a), z)).re /
           split::inner(z, z).re;
  };
  return loss;
}

inline CorpusLoss dft_energy(std::size_t n, Rng& rng) {
  const Tensor weights = rng.real_vector(n, 0.5, 1.5);
  const Tensor u = rng.complex_vector(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  CorpusLoss loss{"dft_energy", {rng.complex_vector(n)}, {"z"}, {}, {}};
  loss.build = [=](Tape& t, std::span<const Var> v) {
    const Var spectrum = dft(v[0]);
    const Var energy = sum(re(constant(t, weights) * (conj(spectrum) * spectrum)));
    return scale(inv_n, energy) + re(sum(constant(t, u) * idft(v[0])));
  };
  loss.split = [=](split::Tape& t, std::span<const split::CTensor> v) {
    const split::CTensor spectrum = split::dft(t, v[0]);
    const split::CScalar energy = split::sum(split::hadamard(
        split::constant(t, weights), split::hadamard(split::conj(spectrum), spectrum)));
    const split::CScalar tail =
        split::sum(split::hadamard(split::constant(t, u), split::idft(t, v[0])));
    return energy.re * split::real_constant(t, inv_n) + tail.re;
  };
  return loss;
}

inline CorpusLoss inner_real(std::size_t n, Rng& rng, Restriction r) {
  Tensor z = vector_point(n, rng, r);
  Tensor w = vector_point(n, rng, r);
  CorpusLoss loss{"inner_real", {std::move(z), std::move(w)}, {"z", "w"}, {}, {}};
  loss.build = [](Tape&, std::span<const Var> v) {
    const Var p = inner(v[0], v[1]);
    return re(p) + im(p);
  };
  loss.split = [](split::Tape&, std::span<const split::CTensor> v) {
    const split::CScalar p = split::inner(v[0], v[1]);
    return p.re + p.im;
  };
  return loss;
}

inline CorpusLoss urnn_unrolled(std::size_t n, std::size_t seq_len, Rng& rng) {
  const urnn::SequenceTask task = urnn::make_task(n, n, n, seq_len, rng);
  const urnn::RnnParams params = urnn::RnnParams::random(n, n, n, rng, true);
  return {"urnn_unrolled", params.tensors(), params.tensor_names(),
          urnn::sequence_loss_builder(params, task.inputs, task.targets),
          std::nullopt};
}

}  // namespace detail

// Draws a fresh instance of loss `id` (constants and evaluation point).
inline CorpusLoss make_loss(std::string_view id, std::size_t dims, Rng& rng,
                            Restriction r = Restriction::None,
                            std::size_t seq_len = 5) {
  if (dims == 0) throw InvalidInputError("corpus: dims must be positive");
  if (r == Restriction::Real && !supports_real_restriction(id)) {
    throw InvalidInputError("corpus: " + std::string(id) +
                            " has no real-restricted form");
  }
  if (id == "abs2") return detail::abs2(dims, rng, r);
  if (id == "rayleigh") return detail::rayleigh(dims, rng, r);
  if (id == "dft_energy") return detail::dft_energy(dims, rng);
  if (id == "inner_real") return detail::inner_real(dims, rng, r);
  if (id == "urnn_unrolled") return detail::urnn_unrolled(dims, seq_len, rng);
  throw InvalidInputError("unknown loss id '" + std::string(id) + "'");
}

}  // namespace cad::corpus
