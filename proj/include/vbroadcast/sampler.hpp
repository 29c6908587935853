#ifndef VBROADCAST_SAMPLER_HPP
#define VBROADCAST_SAMPLER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "vbroadcast/choi.hpp"

namespace vbroadcast {

//------------------------------------------------------------------------
// Counter-based RNG
//------------------------------------------------------------------------
// Round m of a run draws from a SplitMix64 stream keyed by (seed, m), so the
// sequence is independent of execution order: parallel and sequential
// evaluation produce identical results for a given seed.

struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next();
  double uniform(); // [0, 1)
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter);
SplitMix64 round_stream(std::uint64_t seed, std::uint64_t round);

//------------------------------------------------------------------------
// Observables
//------------------------------------------------------------------------

// Hermitian observable on a reference (x) output space, with the
// eigendecomposition cached for Born sampling. The final subsystem of the
// layout is matched to the selected broadcast output B_j.
struct Observable {
  ComplexMatrix matrix;
  SystemLayout layout;
  std::vector<double> eigenvalues;
  ComplexMatrix eigenvectors;

  double spectral_norm() const;
};

// Validates Hermiticity (1e-12) and caches the eigendecomposition.
Observable make_observable(ComplexMatrix matrix, SystemLayout layout);

//------------------------------------------------------------------------
// Estimation
//------------------------------------------------------------------------

// Explicit Hoeffding count for summands ranged in [-gamma, gamma]:
//   M = ceil(2 gamma^2 ln(2/epsilon) / delta^2).
// Requires gamma >= 1, delta > 0, 0 < epsilon < 1.
std::size_t hoeffding_rounds(double gamma, double delta, double epsilon);

struct RoundRecord {
  std::uint32_t channel; // 1 or 2
  std::int8_t sign;      // +1 for channel 1, -1 for channel 2
  double lambda;         // sampled eigenvalue of the observable
};

struct SamplingResult {
  double estimate = 0.0; // xi = (gamma / M) sum_m sign_m lambda_m
  std::size_t rounds = 0;
  double gamma = 0.0;
  double empirical_std = 0.0; // sample std dev of the summands gamma*s*lambda
  double ci95_low = 0.0;      // normal-approximation 95% interval on xi
  double ci95_high = 0.0;
  std::string target_subsystem; // B_j label
  std::uint64_t seed = 0;
  std::vector<RoundRecord> records;
};

// Quasiprobability sampling of the decomposition: each round draws channel i
// with probability p_i/gamma, applies it exactly, and Born-samples an
// eigenvalue of obs on the AB_j marginal; the signed average times gamma
// estimates tr[O rho]. Deterministic for a fixed seed.
SamplingResult run_estimation(const ComplexMatrix &rho,
                              const SystemLayout &rho_layout,
                              const HptpDecomposition &decomp,
                              const Observable &obs, std::size_t j,
                              std::size_t rounds, std::uint64_t seed);

// Deterministic value tr[O tr_{\ABj}[(p1 N1 - p2 N2)(rho)]]; oracle for the
// estimator tests.
double exact_expectation(const ComplexMatrix &rho, const SystemLayout &rho_layout,
                         const HptpDecomposition &decomp, const Observable &obs,
                         std::size_t j);

struct BiasReport {
  double mean_estimate = 0.0;
  double oracle = 0.0;
  double z_score = 0.0;
  bool degenerate_std = false; // all trial estimates identical
  bool pass = false;
  std::size_t trials = 0;
  std::size_t rounds_per_trial = 0;
};

// Runs `trials` independent estimations (trial t keyed off mix_seed(seed, t))
// and z-tests the mean against exact_expectation. Requires trials >= 30.
// A degenerate std is reported, not failed.
BiasReport bias_check(const ComplexMatrix &rho, const SystemLayout &rho_layout,
                      const HptpDecomposition &decomp, const Observable &obs,
                      std::size_t j, std::size_t trials,
                      std::size_t rounds_per_trial, std::uint64_t seed);

// CSV trace: header round,channel_index,sign,outcome_lambda
std::string records_to_csv(const std::vector<RoundRecord> &records);

} // namespace vbroadcast

#endif
