#include "vbroadcast/choi.hpp"

#include <cmath>
#include <stdexcept>

namespace vbroadcast {

namespace {

std::string output_label(std::size_t j) { return "B" + std::to_string(j); }

double pow_int(double base, std::size_t exp) {
  double out = 1.0;
  for (std::size_t i = 0; i < exp; ++i)
    out *= base;
  return out;
}

void check_side_cap(std::size_t d, std::size_t n, std::size_t side_cap,
                    const char *what) {
  double side = 1.0;
  for (std::size_t i = 0; i < n + 1; ++i) {
    side *= static_cast<double>(d);
    if (side > static_cast<double>(side_cap))
      throw std::invalid_argument(std::string(what) +
                                  ": d^(n+1) exceeds the dense size cap");
  }
}

} // namespace

SystemLayout broadcast_layout(std::size_t d, std::size_t n) {
  std::vector<Subsystem> subs;
  subs.push_back({"B", d});
  for (std::size_t j = 1; j <= n; ++j)
    subs.push_back({output_label(j), d});
  return SystemLayout(std::move(subs));
}

ChoiOperator make_choi(ComplexMatrix matrix, SystemLayout layout) {
  if (layout.size() < 2)
    throw std::invalid_argument("make_choi: layout needs B plus outputs");
  if (layout.at(0).label != "B")
    throw std::invalid_argument("make_choi: first subsystem must be labeled B");
  const std::size_t d = layout.at(0).dim;
  for (std::size_t i = 1; i < layout.size(); ++i) {
    if (layout.at(i).label != output_label(i))
      throw std::invalid_argument("make_choi: outputs must be labeled B1..Bn");
    if (layout.at(i).dim != d)
      throw std::invalid_argument("make_choi: output dimension differs from input");
  }
  if (matrix.rows() != layout.total_dim() || !matrix.square())
    throw std::invalid_argument("make_choi: matrix side does not match layout");
  if (matrix.herm_defect() > kHermTolConstruct)
    throw std::invalid_argument("make_choi: matrix is not Hermitian");
  if (std::abs(matrix.trace().imag()) > kHermTolConstruct)
    throw std::invalid_argument("make_choi: trace is not real");
  return ChoiOperator{std::move(matrix), std::move(layout)};
}

ChoiOperator choi_identity_channel(std::size_t d) {
  return make_choi(max_entangled(d), broadcast_layout(d, 1));
}

ChoiOperator choi_warmup_2broadcast(std::size_t d) {
  if (d == 0)
    throw std::invalid_argument("choi_warmup_2broadcast: d must be positive");
  const SystemLayout layout = broadcast_layout(d, 2);
  const ComplexMatrix phi = max_entangled(d);
  ComplexMatrix j = embed(phi, {"B", "B1"}, layout);
  j += embed(phi, {"B", "B2"}, layout);
  j -= embed(phi, {"B1", "B2"}, layout);
  j *= 1.0 / static_cast<double>(d);
  return make_choi(std::move(j), layout);
}

ChoiOperator choi_universal_nbroadcast(std::size_t d, std::size_t n,
                                       std::size_t side_cap) {
  if (d == 0)
    throw std::invalid_argument("choi_universal_nbroadcast: d must be positive");
  if (n < 2)
    throw std::invalid_argument("choi_universal_nbroadcast: n must be >= 2");
  check_side_cap(d, n, side_cap, "choi_universal_nbroadcast");

  const SystemLayout layout = broadcast_layout(d, n);
  const ComplexMatrix phi = max_entangled(d);
  const ComplexMatrix base = embed(phi, {"B", "B1"}, layout);

  ComplexMatrix j = base;
  for (std::size_t k = 2; k <= n; ++k)
    j += swap_conjugate(base, layout, "B1", output_label(k));
  ComplexMatrix repl = embed(phi, {"B1", "B2"}, layout);
  repl *= static_cast<double>(n - 1);
  j -= repl;
  j *= 1.0 / pow_int(static_cast<double>(d), n - 1);
  return make_choi(std::move(j), layout);
}

ComplexMatrix HptpDecomposition::signed_choi() const {
  ComplexMatrix out = choi1.matrix;
  out *= p1;
  ComplexMatrix neg = choi2.matrix;
  neg *= p2;
  out -= neg;
  return out;
}

HptpDecomposition choi_optimal_2broadcast(std::size_t d) {
  if (d < 2)
    throw std::invalid_argument(
        "choi_optimal_2broadcast: requires d >= 2 (d^2-2 changes sign below)");
  const SystemLayout layout = broadcast_layout(d, 2);
  const double dd = static_cast<double>(d);

  // M = Phi_{BB1} (x) I_{B2}; N = I_B (x) F_{B1B2} acts as the permutation
  // swapping the two output digits, so NMN / MN / NM are entry relabelings.
  const ComplexMatrix m = embed(max_entangled(d), {"B", "B1"}, layout);
  const ComplexMatrix nmn = swap_conjugate(m, layout, "B1", "B2");
  const ComplexMatrix mn = swap_right_mul(m, layout, "B1", "B2");
  const ComplexMatrix nm = swap_left_mul(m, layout, "B1", "B2");

  ComplexMatrix j1 = m + nmn + mn + nm;
  j1 *= 1.0 / (2.0 * (dd + 1.0));

  ComplexMatrix inner = dd * (m + nmn) - (mn + nm);
  inner *= 1.0 / (dd * dd - 1.0);
  ComplexMatrix j2 = ComplexMatrix::identity(layout.total_dim()) - inner;
  j2 *= 1.0 / (dd * dd - 2.0);

  j1.hermitize();
  j2.hermitize();
  return HptpDecomposition{2.0 * dd / (dd + 1.0), make_choi(std::move(j1), layout),
                           (dd - 1.0) / (dd + 1.0), make_choi(std::move(j2), layout)};
}

HptpDecomposition choi_universal_decomposition(std::size_t d, std::size_t n,
                                               std::size_t side_cap) {
  if (d == 0 || n < 2)
    throw std::invalid_argument("choi_universal_decomposition: need d >= 1, n >= 2");
  check_side_cap(d, n, side_cap, "choi_universal_decomposition");

  const SystemLayout layout = broadcast_layout(d, n);
  const ComplexMatrix phi = max_entangled(d);
  const ComplexMatrix base = embed(phi, {"B", "B1"}, layout);
  const double scale = pow_int(static_cast<double>(d), n - 1);

  ComplexMatrix m1 = base;
  for (std::size_t k = 2; k <= n; ++k)
    m1 += swap_conjugate(base, layout, "B1", output_label(k));
  m1 *= 1.0 / (static_cast<double>(n) * scale);

  ComplexMatrix m2 = embed(phi, {"B1", "B2"}, layout);
  m2 *= 1.0 / scale;

  return HptpDecomposition{static_cast<double>(n), make_choi(std::move(m1), layout),
                           static_cast<double>(n - 1),
                           make_choi(std::move(m2), layout)};
}

std::pair<ComplexMatrix, SystemLayout> apply_choi(const ChoiOperator &choi,
                                                  const ComplexMatrix &rho,
                                                  const SystemLayout &rho_layout) {
  if (rho.rows() != rho_layout.total_dim() || !rho.square())
    throw std::invalid_argument("apply_choi: state side does not match layout");
  const std::size_t b_pos = rho_layout.index_of("B");
  const std::size_t d = choi.input_dim();
  if (rho_layout.at(b_pos).dim != d)
    throw std::invalid_argument("apply_choi: B dimension mismatch");

  // move B to the last slot so the state factors as (reference, B)
  std::vector<std::size_t> order;
  std::vector<Subsystem> ref_subs;
  for (std::size_t i = 0; i < rho_layout.size(); ++i)
    if (i != b_pos) {
      order.push_back(i);
      ref_subs.push_back(rho_layout.at(i));
    }
  order.push_back(b_pos);
  const ComplexMatrix rho_perm = permute_subsystems(rho, rho_layout, order);

  const std::size_t dim_a = rho.rows() / d;
  const std::size_t dim_v = choi.matrix.rows() / d; // d^n

  // out[(a,v),(a',v')] = sum_{b,b'} rho[(a,b),(a',b')] J[(b,v),(b',v')],
  // the index form of tr_B[(rho^T_B (x) I)(I_A (x) J)]
  ComplexMatrix out(dim_a * dim_v, dim_a * dim_v);
  for (std::size_t a = 0; a < dim_a; ++a)
    for (std::size_t ap = 0; ap < dim_a; ++ap)
      for (std::size_t v = 0; v < dim_v; ++v)
        for (std::size_t vp = 0; vp < dim_v; ++vp) {
          complex_t sum = 0.0;
          for (std::size_t b = 0; b < d; ++b)
            for (std::size_t bp = 0; bp < d; ++bp)
              sum += rho_perm(a * d + b, ap * d + bp) *
                     choi.matrix(b * dim_v + v, bp * dim_v + vp);
          out(a * dim_v + v, ap * dim_v + vp) = sum;
        }

  std::vector<Subsystem> out_subs = ref_subs;
  for (std::size_t i = 1; i < choi.layout.size(); ++i)
    out_subs.push_back(choi.layout.at(i));
  return {std::move(out), SystemLayout(std::move(out_subs))};
}

UniversalityReport verify_universal(const ChoiOperator &choi, double tol) {
  const std::size_t n = choi.n_outputs();
  const ComplexMatrix phi = max_entangled(choi.input_dim());
  UniversalityReport report;
  report.pass = true;
  for (std::size_t j = 1; j <= n; ++j) {
    const ComplexMatrix marginal =
        partial_trace(choi.matrix, choi.layout, {"B", output_label(j)});
    const double dev = max_abs_diff(marginal, phi);
    report.deviations.push_back(dev);
    if (dev > tol)
      report.pass = false;
  }
  return report;
}

CptpReport verify_cptp(const ChoiOperator &choi, double scale, double tol) {
  CptpReport report;
  report.min_eigenvalue = min_eigenvalue(choi.matrix);
  report.psd_pass = report.min_eigenvalue >= -tol;

  const ComplexMatrix reduced = partial_trace(choi.matrix, choi.layout, {"B"});
  ComplexMatrix target = ComplexMatrix::identity(choi.input_dim());
  target *= scale;
  report.max_tp_deviation = max_abs_diff(reduced, target);
  report.tp_pass = report.max_tp_deviation <= tol;
  report.pass = report.psd_pass && report.tp_pass;
  return report;
}

} // namespace vbroadcast
