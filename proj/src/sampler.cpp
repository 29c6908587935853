#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "vbroadcast/sampler.hpp"

namespace vbroadcast {

//------------------------------------------------------------------------
// Counter-based RNG
//------------------------------------------------------------------------

std::uint64_t SplitMix64::next() {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter) {
  SplitMix64 s{seed ^ (counter + 1) * 0xD1B54A32D192ED03ULL};
  return s.next();
}

SplitMix64 round_stream(std::uint64_t seed, std::uint64_t round) {
  return SplitMix64{mix_seed(seed, round)};
}

//------------------------------------------------------------------------
// Observables
//------------------------------------------------------------------------

double Observable::spectral_norm() const {
  double norm = 0.0;
  for (double v : eigenvalues)
    norm = std::max(norm, std::abs(v));
  return norm;
}

Observable make_observable(ComplexMatrix matrix, SystemLayout layout) {
  if (matrix.rows() != layout.total_dim() || !matrix.square())
    throw std::invalid_argument("make_observable: side does not match layout");
  if (matrix.herm_defect() > kHermTolConstruct)
    throw std::invalid_argument("make_observable: matrix is not Hermitian");
  Observable obs;
  EigResult eig = herm_eig(matrix);
  obs.matrix = std::move(matrix);
  obs.layout = std::move(layout);
  obs.eigenvalues = std::move(eig.eigenvalues);
  obs.eigenvectors = std::move(eig.eigenvectors);
  return obs;
}

//------------------------------------------------------------------------
// Estimation
//------------------------------------------------------------------------

std::size_t hoeffding_rounds(double gamma, double delta, double epsilon) {
  if (gamma < 1.0)
    throw std::invalid_argument("hoeffding_rounds: gamma must be >= 1");
  if (!(delta > 0.0))
    throw std::invalid_argument("hoeffding_rounds: delta must be positive");
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw std::invalid_argument("hoeffding_rounds: epsilon must be in (0, 1)");
  const double raw =
      2.0 * gamma * gamma * std::log(2.0 / epsilon) / (delta * delta);
  return static_cast<std::size_t>(std::ceil(raw));
}

namespace {

std::string output_label(std::size_t j) { return "B" + std::to_string(j); }

// Born outcome distribution of obs on the AB_j marginal of one channel
// applied to rho: q_k = <v_k| sigma |v_k>, clamped against roundoff.
std::vector<double> outcome_distribution(const ComplexMatrix &rho,
                                         const SystemLayout &rho_layout,
                                         const ChoiOperator &channel,
                                         const Observable &obs, std::size_t j) {
  auto [out, out_layout] = apply_choi(channel, rho, rho_layout);
  std::set<std::string> keep;
  const std::size_t ref_count = out_layout.size() - channel.n_outputs();
  for (std::size_t i = 0; i < ref_count; ++i)
    keep.insert(out_layout.at(i).label); // reference subsystems lead
  keep.insert(output_label(j));
  const ComplexMatrix sigma = partial_trace(out, out_layout, keep);
  if (sigma.rows() != obs.matrix.rows())
    throw std::invalid_argument(
        "sampler: observable side does not match the AB_j marginal");

  const std::size_t dim = sigma.rows();
  std::vector<double> q(dim, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    complex_t val = 0.0;
    for (std::size_t r = 0; r < dim; ++r) {
      complex_t row = 0.0;
      for (std::size_t c = 0; c < dim; ++c)
        row += sigma(r, c) * obs.eigenvectors(c, k);
      val += std::conj(obs.eigenvectors(r, k)) * row;
    }
    q[k] = std::max(0.0, val.real());
    total += q[k];
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw std::runtime_error("sampler: outcome distribution is not normalized");
  for (double &v : q)
    v /= total;
  return q;
}

void validate_target(const HptpDecomposition &decomp, std::size_t j) {
  if (j < 1 || j > decomp.choi1.n_outputs())
    throw std::invalid_argument("sampler: output index j out of range");
}

} // namespace

SamplingResult run_estimation(const ComplexMatrix &rho,
                              const SystemLayout &rho_layout,
                              const HptpDecomposition &decomp,
                              const Observable &obs, std::size_t j,
                              std::size_t rounds, std::uint64_t seed) {
  validate_target(decomp, j);
  if (rounds == 0)
    throw std::invalid_argument("run_estimation: rounds must be >= 1");
  if (decomp.p1 < 0.0 || decomp.p2 < 0.0)
    throw std::invalid_argument("run_estimation: negative channel weight");
  if (decomp.gamma() <= 0.0)
    throw std::invalid_argument("run_estimation: decomposition has zero weight");

  const double gamma = decomp.gamma();
  const double prob1 = decomp.p1 / gamma;

  // postchannel outcome distributions are round independent: cache them
  const std::vector<double> q1 =
      outcome_distribution(rho, rho_layout, decomp.choi1, obs, j);
  const std::vector<double> q2 =
      (decomp.p2 > 0.0)
          ? outcome_distribution(rho, rho_layout, decomp.choi2, obs, j)
          : std::vector<double>();

  std::vector<double> cdf1(q1.size()), cdf2(q2.size());
  std::partial_sum(q1.begin(), q1.end(), cdf1.begin());
  std::partial_sum(q2.begin(), q2.end(), cdf2.begin());

  SamplingResult result;
  result.rounds = rounds;
  result.gamma = gamma;
  result.target_subsystem = output_label(j);
  result.seed = seed;
  result.records.reserve(rounds);

  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t m = 0; m < rounds; ++m) {
    SplitMix64 rng = round_stream(seed, m);
    const bool first = rng.uniform() < prob1;
    const std::vector<double> &cdf = first ? cdf1 : cdf2;
    const double u = rng.uniform();
    const std::size_t k =
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    const double lambda =
        obs.eigenvalues[std::min(k, obs.eigenvalues.size() - 1)];
    const double sign = first ? 1.0 : -1.0;
    const double summand = gamma * sign * lambda;
    sum += summand;
    sum_sq += summand * summand;
    result.records.push_back({first ? 1u : 2u,
                              static_cast<std::int8_t>(first ? 1 : -1), lambda});
  }

  const double mm = static_cast<double>(rounds);
  result.estimate = sum / mm;
  if (rounds > 1) {
    const double var =
        std::max(0.0, (sum_sq - sum * sum / mm) / (mm - 1.0));
    result.empirical_std = std::sqrt(var);
  }
  const double half = 1.959963984540054 * result.empirical_std / std::sqrt(mm);
  result.ci95_low = result.estimate - half;
  result.ci95_high = result.estimate + half;
  return result;
}

double exact_expectation(const ComplexMatrix &rho, const SystemLayout &rho_layout,
                         const HptpDecomposition &decomp, const Observable &obs,
                         std::size_t j) {
  validate_target(decomp, j);

  auto expect = [&](const ChoiOperator &channel) {
    auto [out, out_layout] = apply_choi(channel, rho, rho_layout);
    std::set<std::string> keep;
    const std::size_t ref_count = out_layout.size() - channel.n_outputs();
    for (std::size_t i = 0; i < ref_count; ++i)
      keep.insert(out_layout.at(i).label);
    keep.insert(output_label(j));
    const ComplexMatrix sigma = partial_trace(out, out_layout, keep);
    if (sigma.rows() != obs.matrix.rows())
      throw std::invalid_argument(
          "sampler: observable side does not match the AB_j marginal");
    complex_t tr = 0.0;
    for (std::size_t r = 0; r < sigma.rows(); ++r)
      for (std::size_t c = 0; c < sigma.cols(); ++c)
        tr += obs.matrix(r, c) * sigma(c, r);
    return tr.real();
  };

  double value = decomp.p1 * expect(decomp.choi1);
  if (decomp.p2 > 0.0)
    value -= decomp.p2 * expect(decomp.choi2);
  return value;
}

BiasReport bias_check(const ComplexMatrix &rho, const SystemLayout &rho_layout,
                      const HptpDecomposition &decomp, const Observable &obs,
                      std::size_t j, std::size_t trials,
                      std::size_t rounds_per_trial, std::uint64_t seed) {
  if (trials < 30)
    throw std::invalid_argument("bias_check: needs at least 30 trials");

  BiasReport report;
  report.trials = trials;
  report.rounds_per_trial = rounds_per_trial;
  report.oracle = exact_expectation(rho, rho_layout, decomp, obs, j);

  std::vector<double> estimates;
  estimates.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = mix_seed(seed ^ 0xB5297A4D9F0E1A2CULL, t);
    estimates.push_back(
        run_estimation(rho, rho_layout, decomp, obs, j, rounds_per_trial,
                       trial_seed)
            .estimate);
  }

  double mean = 0.0;
  for (double v : estimates)
    mean += v;
  mean /= static_cast<double>(trials);
  double var = 0.0;
  for (double v : estimates)
    var += (v - mean) * (v - mean);
  var /= static_cast<double>(trials - 1);
  const double std_dev = std::sqrt(var);

  report.mean_estimate = mean;
  const double scale = std::max(1.0, std::abs(mean));
  if (std_dev <= 1e-14 * scale) {
    report.degenerate_std = true;
    report.z_score = 0.0;
    report.pass = std::abs(mean - report.oracle) <= 1e-10 * scale;
  } else {
    report.z_score = (mean - report.oracle) *
                     std::sqrt(static_cast<double>(trials)) / std_dev;
    report.pass = std::abs(report.z_score) <= 4.0;
  }
  return report;
}

std::string records_to_csv(const std::vector<RoundRecord> &records) {
  std::ostringstream os;
  os << "round,channel_index,sign,outcome_lambda\n";
  os.precision(17);
  for (std::size_t m = 0; m < records.size(); ++m)
    os << m << ',' << records[m].channel << ','
       << static_cast<int>(records[m].sign) << ',' << records[m].lambda << '\n';
  return os.str();
}

} // namespace vbroadcast
