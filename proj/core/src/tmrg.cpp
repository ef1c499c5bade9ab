#include "qtm/tmrg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "qtm/eigensolver.hpp"

// ---------------------------------------------------------------------------
// TMRG layout.
//
// The checkerboard ring of 2M auxiliary rows is grown from M0 = 2 by
// inserting one plaquette pair per step at a fixed seam. Rows join the
// renormalized interiors only once both of their permanent gates exist, so
// each side keeps its two newest rows explicit. The superblock state is
//
//   v[p, b1, b0 | a0, pE, a1],
//   index = ((((p*2 + b1)*2 + b0)*2 + a0)*mE + pE)*2 + a1
//
// with p/pE the interior indices (dimensions mS/mE), b0/b1 the newest and
// previous explicit rows of the S side (B chain, grown downward in the ring)
// and a0/a1 of the E side (A chain). The symmetric cut separates (p, b1, b0)
// from (a0, pE, a1).
//
// Each interior is stored as four matrices B_alpha[(q*2+xo), (p*2+xi)]:
// q/p renormalized out/in states, alpha the bond index of the severed ring
// gate at the far cut, (xi, xo) the open legs facing the oldest explicit row.
// At odd steps xi consumes that explicit state index directly (the absorbed
// edge gate was even-layer), at even steps xi consumes the intermediate
// worldline leg produced by the step's new outer gate.
//
// The checkerboard gate is symmetric for the swap-symmetric bonds handled
// here, so the transpose of the effective column operator is obtained by
// transposing every piece and reversing the gate sweeps; right and left
// eigenvectors are computed by two warm-started Arnoldi runs per step.
// ---------------------------------------------------------------------------

namespace qtm {

namespace {

using Eigen::Matrix4d;

struct Block {
  std::array<RMatrix, 4> b;  // B_alpha[(q*2+xo) x (p*2+xi)]
  int m = 0;                 // interior dimension
  std::vector<int> charges;  // per interior basis state (XXZ only)
  RMatrix flip;              // renormalized spin flip (m x m)
};

// ---- small tensor helpers -------------------------------------------------

// Apply a 4x4 gate (packing (bottom*2+top)) to two binary factors of a
// flattened array with strides sb (bottom) and st (top). `outer` lists the
// remaining factors as (size, stride).
void sweep_gate(RVector& v, const std::vector<std::pair<long, long>>& outer, long sb, long st,
                const Matrix4d& g) {
  std::array<long, 8> size{}, stride{};
  const int nf = static_cast<int>(outer.size());
  long total = 1;
  for (int i = 0; i < nf; ++i) {
    size[i] = outer[i].first;
    stride[i] = outer[i].second;
    total *= size[i];
  }
  std::array<long, 8> counter{};
  long base = 0;
  for (long it = 0; it < total; ++it) {
    const double v00 = v(base), v01 = v(base + st), v10 = v(base + sb), v11 = v(base + sb + st);
    v(base) = g(0, 0) * v00 + g(0, 1) * v01 + g(0, 2) * v10 + g(0, 3) * v11;
    v(base + st) = g(1, 0) * v00 + g(1, 1) * v01 + g(1, 2) * v10 + g(1, 3) * v11;
    v(base + sb) = g(2, 0) * v00 + g(2, 1) * v01 + g(2, 2) * v10 + g(2, 3) * v11;
    v(base + sb + st) = g(3, 0) * v00 + g(3, 1) * v01 + g(3, 2) * v10 + g(3, 3) * v11;
    for (int i = 0; i < nf; ++i) {
      base += stride[i];
      if (++counter[i] < size[i]) break;
      base -= size[i] * stride[i];
      counter[i] = 0;
    }
  }
}

// w[b, f', a] = sum_f O(f', f) v[b, f, a]
void apply_on_factor(RVector& v, long before, long fdim, long after, const RMatrix& o) {
  RVector out(v.size());
  for (long b = 0; b < before; ++b) {
    Eigen::Map<const RMatrix> vin(v.data() + b * fdim * after, after, fdim);
    Eigen::Map<RMatrix> vout(out.data() + b * fdim * after, after, fdim);
    vout.noalias() = vin * o.transpose();
  }
  v.swap(out);
}

// ---- superblock transfer --------------------------------------------------

struct StepContext {
  const Block* s;
  const Block* e;
  const std::array<double, 4>* alpha_sign;
  Matrix4d gate;
  bool odd_step;  // outer gates are odd-layer (w -> u) when true
  long ms, me;

  long dim() const { return 16 * ms * me; }
  long str_a1() const { return 1; }
  long str_pe() const { return 2; }
  long str_a0() const { return 2 * me; }
  long str_b0() const { return 4 * me; }
  long str_b1() const { return 8 * me; }
  long str_p() const { return 16 * me; }

  std::vector<std::pair<long, long>> others_mid() const {
    return {{ms, str_p()}, {2, str_b1()}, {me, str_pe()}, {2, str_a1()}};
  }
  std::vector<std::pair<long, long>> others_souter() const {
    return {{ms, str_p()}, {2, str_a0()}, {me, str_pe()}, {2, str_a1()}};
  }
  std::vector<std::pair<long, long>> others_eouter() const {
    return {{ms, str_p()}, {2, str_b1()}, {2, str_b0()}, {me, str_pe()}};
  }
};

// interior contractions; alpha ties the two sides through the severed cut gate
void interior_gemms(const StepContext& c, RVector& work, RVector& out, bool transpose) {
  const long n8 = 8 * c.me;
  Eigen::Map<const RMatrix> vmap(work.data(), n8, 2 * c.ms);
  out.setZero(c.dim());
  Eigen::Map<RMatrix> omap(out.data(), n8, 2 * c.ms);
  RMatrix z(n8, 2 * c.ms);
  for (int a = 0; a < 4; ++a) {
    if (transpose)
      z.noalias() = vmap * c.s->b[a];
    else
      z.noalias() = vmap * c.s->b[a].transpose();
    const double sgn = (*c.alpha_sign)[a];
    for (int g = 0; g < 4; ++g) {
      auto zb = z.middleRows(g * 2 * c.me, 2 * c.me);
      if (transpose)
        omap.middleRows(g * 2 * c.me, 2 * c.me).noalias() += sgn * (c.e->b[a].transpose() * zb);
      else
        omap.middleRows(g * 2 * c.me, 2 * c.me).noalias() += sgn * (c.e->b[a] * zb);
    }
  }
}

RVector apply_superblock(const StepContext& c, const RVector& v) {
  RVector work = v;
  if (!c.odd_step) {
    sweep_gate(work, c.others_souter(), c.str_b0(), c.str_b1(), c.gate);  // gate(B_t, B_{t-1})
    sweep_gate(work, c.others_eouter(), c.str_a1(), c.str_a0(), c.gate);  // gate(A_{t-1}, A_t)
  }
  RVector out;
  interior_gemms(c, work, out, false);
  if (c.odd_step) {
    sweep_gate(out, c.others_mid(), c.str_a0(), c.str_b0(), c.gate);     // mid (A_t, B_t)
    sweep_gate(out, c.others_souter(), c.str_b0(), c.str_b1(), c.gate);  // S outer
    sweep_gate(out, c.others_eouter(), c.str_a1(), c.str_a0(), c.gate);  // E outer
  } else {
    sweep_gate(out, c.others_mid(), c.str_a0(), c.str_b0(), c.gate);     // mid (A_t, B_t)
  }
  return out;
}

// exact transpose of apply_superblock: reversed sweeps (the gate is
// symmetric), transposed interior factors
RVector apply_superblock_transpose(const StepContext& c, const RVector& v) {
  RVector work = v;
  if (c.odd_step) {
    sweep_gate(work, c.others_eouter(), c.str_a1(), c.str_a0(), c.gate);
    sweep_gate(work, c.others_souter(), c.str_b0(), c.str_b1(), c.gate);
    sweep_gate(work, c.others_mid(), c.str_a0(), c.str_b0(), c.gate);
  } else {
    sweep_gate(work, c.others_mid(), c.str_a0(), c.str_b0(), c.gate);
  }
  RVector out;
  interior_gemms(c, work, out, true);
  if (!c.odd_step) {
    sweep_gate(out, c.others_eouter(), c.str_a1(), c.str_a0(), c.gate);
    sweep_gate(out, c.others_souter(), c.str_b0(), c.str_b1(), c.gate);
  }
  return out;
}

}  // namespace

// ---- truncation -----------------------------------------------------------

namespace {

// multiplet-respecting kept count: never split weights equal within rtol
int multiplet_boundary(const std::vector<double>& w, int m, double rtol) {
  const int dim = static_cast<int>(w.size());
  if (m >= dim) return dim;
  const auto same = [&](int i, int j) {
    const double scale = std::max({std::abs(w[i]), std::abs(w[j]), 1e-300});
    return std::abs(w[i] - w[j]) <= rtol * scale;
  };
  int k = m;
  while (k > 0 && same(k - 1, k)) --k;  // shrink to the multiplet edge
  if (k == 0) {
    k = m;
    while (k < dim && same(k - 1, k)) ++k;  // the first multiplet alone exceeds m
  }
  return k;
}

}  // namespace

TruncationResult truncate_real(const RMatrix& rho, int m, const TMRGConfig& config) {
  detail::require(rho.rows() == rho.cols(), "truncate: matrix must be square");
  detail::require(m >= 1, "truncate: kept dimension must be positive");
  const int dim = static_cast<int>(rho.rows());
  TruncationResult res;

  if (m >= dim) {
    res.right_projector = RMatrix::Identity(dim, dim);
    res.left_projector = RMatrix::Identity(dim, dim);
    res.kept = dim;
    res.discarded_weight = 0.0;
    return res;
  }

  Eigen::EigenSolver<RMatrix> es(rho);
  detail::require(es.info() == Eigen::Success, "truncate: eigensolver failed");
  const CVector vals = es.eigenvalues();
  std::vector<int> order(dim);
  for (int i = 0; i < dim; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return vals(i).real() > vals(j).real(); });

  std::vector<double> w(dim);
  for (int i = 0; i < dim; ++i) w[i] = vals(order[i]).real();
  const int k = multiplet_boundary(w, m, 1e-10);

  const double wmax = std::max(std::abs(w[0]), 1e-300);
  bool fallback = false;
  for (int i = 0; i < k; ++i)
    if (std::abs(vals(order[i]).imag()) > 1e-10 * wmax) fallback = true;

  if (!fallback) {
    RMatrix r(dim, k);
    for (int i = 0; i < k; ++i) r.col(i) = es.eigenvectors().col(order[i]).real();

    Eigen::EigenSolver<RMatrix> est(RMatrix(rho.transpose()));
    detail::require(est.info() == Eigen::Success, "truncate: transpose eigensolver failed");
    const CVector tvals = est.eigenvalues();
    std::vector<int> torder(dim);
    for (int i = 0; i < dim; ++i) torder[i] = i;
    std::sort(torder.begin(), torder.end(),
              [&](int i, int j) { return tvals(i).real() > tvals(j).real(); });
    RMatrix l(dim, k);
    for (int i = 0; i < k; ++i) l.col(i) = est.eigenvectors().col(torder[i]).real();

    const RMatrix c = l.transpose() * r;
    Eigen::JacobiSVD<RMatrix> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    const double cond =
        smin > 0 ? svd.singularValues()(0) / smin : std::numeric_limits<double>::infinity();
    if (cond > config.gram_condition_limit) {
      fallback = true;
    } else {
      res.left_projector = l * c.inverse().transpose();
      res.right_projector = std::move(r);
      double kept_sum = 0.0;
      for (int i = 0; i < k; ++i) kept_sum += w[i];
      res.kept = k;
      res.discarded_weight = 1.0 - kept_sum;
      return res;
    }
  }

  const RMatrix sym = 0.5 * (rho + rho.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> ses(sym);
  detail::require(ses.info() == Eigen::Success, "truncate: symmetric fallback failed");
  std::vector<double> sw(dim);
  for (int i = 0; i < dim; ++i) sw[i] = ses.eigenvalues()(dim - 1 - i);  // descending
  const int ks = multiplet_boundary(sw, m, 1e-10);
  RMatrix r(dim, ks);
  for (int i = 0; i < ks; ++i) r.col(i) = ses.eigenvectors().col(dim - 1 - i);
  res.right_projector = r;
  res.left_projector = std::move(r);
  res.symmetrized_fallback = true;
  double kept_sum = 0.0;
  for (int i = 0; i < ks; ++i) kept_sum += sw[i];
  res.kept = ks;
  res.discarded_weight = 1.0 - kept_sum;
  return res;
}

TruncationResult truncate(const DenseOperator& rho_bar_a, int m, const TMRGConfig& config) {
  const Complex tr = rho_bar_a.trace();
  if (std::abs(tr - Complex(1.0, 0.0)) > 1e-8) {
    std::ostringstream os;
    os << "truncate: trace " << tr << " deviates from 1 by more than 1e-8";
    detail::fail(os.str());
  }
  detail::require(rho_bar_a.mat.imag().cwiseAbs().maxCoeff() < 1e-12,
                  "truncate: expected a real density matrix");
  return truncate_real(rho_bar_a.mat.real(), m, config);
}

// ---- block updates --------------------------------------------------------

namespace {

// odd step: absorb the oldest explicit row through the new outer o-gate,
// G[(u_new*2+u_old),(w_new*2+w_old)]; new legs (xi'=w_new, xo'=u_new).
// The E side passes the slot-swapped gate (its outer gate attaches with the
// old row at the bottom slot).
RMatrix update_block_odd(const RMatrix& b, int m, const Matrix4d& g, const RMatrix& rb,
                         const RMatrix& lb) {
  const int mk = static_cast<int>(rb.cols());
  RMatrix rb2(2 * m, mk);
  for (int e = 0; e < 2; ++e)
    for (int p = 0; p < m; ++p) rb2.row(p * 2 + e) = rb.row(e * m + p);
  const RMatrix u1m = b * rb2;  // [(q*2+w_old) x k]

  std::array<RMatrix, 2> lbs;
  for (int e = 0; e < 2; ++e) lbs[e] = lb.middleRows(e * m, m);

  std::array<std::array<RMatrix, 2>, 2> vv;  // [u_old][w_old] -> (k x k)
  for (int uo = 0; uo < 2; ++uo)
    for (int wo = 0; wo < 2; ++wo) {
      RMatrix rows(m, mk);
      for (int q = 0; q < m; ++q) rows.row(q) = u1m.row(q * 2 + wo);
      vv[uo][wo].noalias() = lbs[uo].transpose() * rows;
    }

  RMatrix out = RMatrix::Zero(2 * mk, 2 * mk);
  for (int un = 0; un < 2; ++un)
    for (int wn = 0; wn < 2; ++wn)
      for (int uo = 0; uo < 2; ++uo)
        for (int wo = 0; wo < 2; ++wo) {
          const double coeff = g(un * 2 + uo, wn * 2 + wo);
          if (coeff == 0.0) continue;
          for (int qq = 0; qq < mk; ++qq)
            for (int pp = 0; pp < mk; ++pp)
              out(qq * 2 + un, pp * 2 + wn) += coeff * vv[uo][wo](qq, pp);
        }
  return out;
}

// even step: the new outer e-gate consumes the explicit state,
// G[(w_new*2+w_old),(s_new*2+s_old)]; new legs (xi'=s_new, xo'=w_new).
RMatrix update_block_even(const RMatrix& b, int m, const Matrix4d& g, const RMatrix& rb,
                          const RMatrix& lb) {
  const int mk = static_cast<int>(rb.cols());
  std::array<RMatrix, 2> rbs, lbs;
  for (int e = 0; e < 2; ++e) {
    rbs[e] = rb.middleRows(e * m, m);
    lbs[e] = lb.middleRows(e * m, m);
  }
  RMatrix out = RMatrix::Zero(2 * mk, 2 * mk);
  for (int wn = 0; wn < 2; ++wn)
    for (int sn = 0; sn < 2; ++sn)
      for (int wo = 0; wo < 2; ++wo) {
        RMatrix rg = RMatrix::Zero(m, mk);
        bool any = false;
        for (int so = 0; so < 2; ++so) {
          const double coeff = g(wn * 2 + wo, sn * 2 + so);
          if (coeff == 0.0) continue;
          rg.noalias() += coeff * rbs[so];
          any = true;
        }
        if (!any) continue;
        RMatrix bslice(2 * m, m);  // B columns (p*2 + w_old)
        for (int p = 0; p < m; ++p) bslice.col(p) = b.col(p * 2 + wo);
        const RMatrix w2 = bslice * rg;  // (2m x k), rows (q*2+u_old)
        for (int uo = 0; uo < 2; ++uo) {
          RMatrix rows(m, mk);
          for (int q = 0; q < m; ++q) rows.row(q) = w2.row(q * 2 + uo);
          const RMatrix contrib = lbs[uo].transpose() * rows;  // (k x k)
          for (int qq = 0; qq < mk; ++qq)
            for (int pp = 0; pp < mk; ++pp) out(qq * 2 + wn, pp * 2 + sn) += contrib(qq, pp);
        }
      }
  return out;
}

std::vector<int> update_charges(const std::vector<int>& charges, int edge_sign,
                                const RMatrix& rvecs, int m) {
  const int k = static_cast<int>(rvecs.cols());
  std::vector<int> out(k, 0);
  for (int c = 0; c < k; ++c) {
    std::map<int, double> mass;
    for (int e = 0; e < 2; ++e)
      for (int p = 0; p < m; ++p) {
        const int q = charges[p] + edge_sign * (1 - 2 * e);
        mass[q] += rvecs(e * m + p, c) * rvecs(e * m + p, c);
      }
    double best_w = -1.0;
    for (const auto& [q, w] : mass)
      if (w > best_w) {
        best_w = w;
        out[c] = q;
      }
  }
  return out;
}

RMatrix update_flip(const RMatrix& flip, const RMatrix& rb, const RMatrix& lb, int m) {
  const RMatrix lb0 = lb.middleRows(0, m), lb1 = lb.middleRows(m, m);
  const RMatrix rb0 = rb.middleRows(0, m), rb1 = rb.middleRows(m, m);
  return lb0.transpose() * flip * rb1 + lb1.transpose() * flip * rb0;
}

// repack a superblock vector into [rest x (b1*mS + p)] (S side) or
// [rest x (a1*mE + pE)] (E side) for the half-step density matrices
RMatrix repack_s(const RVector& v, long ms, long me) {
  const long n8 = 8 * me;
  RMatrix out(n8, 2 * ms);
  for (long p = 0; p < ms; ++p)
    for (long b1 = 0; b1 < 2; ++b1)
      out.col(b1 * ms + p) = v.segment((p * 2 + b1) * n8, n8);
  return out;
}

RMatrix repack_e(const RVector& v, long ms, long me) {
  RMatrix out(8 * ms, 2 * me);
  for (long pe = 0; pe < me; ++pe)
    for (long a1 = 0; a1 < 2; ++a1) {
      const long col = a1 * me + pe;
      for (long high = 0; high < 8 * ms; ++high) out(high, col) = v((high * me + pe) * 2 + a1);
    }
  return out;
}

}  // namespace

// ---- sweep ----------------------------------------------------------------

std::vector<TMRGPoint> tmrg_sweep(const SpinChainModel& model, const TMRGConfig& config) {
  detail::require(config.kept_states >= 2, "tmrg_sweep: kept_states must be >= 2");
  detail::require(config.delta_beta > 0.0, "tmrg_sweep: delta_beta must be positive");
  detail::require(!config.target_temperatures.empty(), "tmrg_sweep: no target temperatures");
  detail::require(model.kind != ModelKind::HeisenbergPair,
                  "tmrg_sweep: the two-site model has no thermodynamic limit");

  std::vector<int> target_m;
  for (double t : config.target_temperatures) {
    const TrotterGrid g = TrotterGrid::for_temperature(config.delta_beta, t);
    detail::require(g.trotter_m >= 3, "tmrg_sweep: target temperature requires M >= 3");
    target_m.push_back(g.trotter_m);
  }
  std::sort(target_m.begin(), target_m.end());
  target_m.erase(std::unique(target_m.begin(), target_m.end()), target_m.end());
  const int m_final = target_m.back();

  const QTMOperator probe(model, TrotterGrid(config.delta_beta, 1));
  const Matrix4d gate = probe.gate_even();
  detail::require((gate - gate.transpose()).cwiseAbs().maxCoeff() < 1e-13,
                  "tmrg_sweep: checkerboard gate not symmetric; bond must be swap-symmetric");
  const Matrix4d gate_slotswap = [&] {
    Matrix4d gs;
    for (int i0 = 0; i0 < 2; ++i0)
      for (int i1 = 0; i1 < 2; ++i1)
        for (int j0 = 0; j0 < 2; ++j0)
          for (int j1 = 0; j1 < 2; ++j1)
            gs(i0 * 2 + i1, j0 * 2 + j1) = gate(i1 * 2 + i0, j1 * 2 + j0);
    return gs;
  }();

  // cut-gate decomposition: Q[(u1*2+w1),(w2*2+u2)] = g[(u1*2+u2),(w1*2+w2)];
  // Q is symmetric for swap-symmetric real bonds.
  Matrix4d q;
  for (int u1 = 0; u1 < 2; ++u1)
    for (int w1 = 0; w1 < 2; ++w1)
      for (int w2 = 0; w2 < 2; ++w2)
        for (int u2 = 0; u2 < 2; ++u2)
          q(u1 * 2 + w1, w2 * 2 + u2) = gate(u1 * 2 + u2, w1 * 2 + w2);
  detail::require((q - q.transpose()).cwiseAbs().maxCoeff() < 1e-12,
                  "tmrg_sweep: cut-gate pairing matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix4d> qes(q);
  std::array<double, 4> alpha_sign{};
  std::array<Eigen::Matrix2d, 4> xfac, yfac;
  for (int a = 0; a < 4; ++a) {
    const double sigma = qes.eigenvalues()(a);
    alpha_sign[a] = sigma >= 0 ? 1.0 : -1.0;
    const double scale = std::sqrt(std::abs(sigma));
    Eigen::Matrix2d x;
    for (int u = 0; u < 2; ++u)
      for (int w = 0; w < 2; ++w) x(u, w) = scale * qes.eigenvectors()(u * 2 + w, a);
    xfac[a] = x;
    yfac[a] = x.transpose();
  }

  // initial blocks at M0 = 2: interiors = rows 1 / 2, edges = rows 0 / 3.
  // S: gate e(0,1) absorbed, open legs (s0, w0); cut half X^alpha at row 1.
  // E: gate e(2,3) absorbed, open legs (s3, w3); cut half Y^alpha at row 2.
  Block blk_s, blk_e;
  blk_s.m = blk_e.m = 2;
  for (int a = 0; a < 4; ++a) {
    RMatrix bs = RMatrix::Zero(4, 4), be = RMatrix::Zero(4, 4);
    for (int qq = 0; qq < 2; ++qq)          // u1 / u2
      for (int pp = 0; pp < 2; ++pp)        // s1 / s2
        for (int xi = 0; xi < 2; ++xi)      // s0 / s3
          for (int xo = 0; xo < 2; ++xo) {  // w0 / w3
            double vs = 0.0, ve = 0.0;
            for (int w = 0; w < 2; ++w) {
              vs += xfac[a](qq, w) * gate(xo * 2 + w, xi * 2 + pp);
              ve += yfac[a](qq, w) * gate(w * 2 + xo, pp * 2 + xi);
            }
            bs(qq * 2 + xo, pp * 2 + xi) = vs;
            be(qq * 2 + xo, pp * 2 + xi) = ve;
          }
    blk_s.b[a] = std::move(bs);
    blk_e.b[a] = std::move(be);
  }
  blk_s.flip = pauli::sx().real();
  blk_e.flip = pauli::sx().real();
  if (model.conserves_sz()) {
    blk_s.charges = {-1, +1};  // row 1 carries sign -1
    blk_e.charges = {+1, -1};  // row 2 carries sign +1
  }

  std::vector<TMRGPoint> points;
  RVector seed_r, seed_l;

  for (int t = 1; 2 + t <= m_final; ++t) {
    const int big_m = 2 + t;
    const bool odd_step = (t % 2 == 1);
    const long ms = blk_s.m, me = blk_e.m;
    const long dim = 16 * ms * me;
    const bool record = std::binary_search(target_m.begin(), target_m.end(), big_m);

    StepContext ctx{&blk_s, &blk_e, &alpha_sign, gate, odd_step, ms, me};

    ArnoldiOptions opt;
    opt.tol = record ? config.eig_tol_record : config.eig_tol_sweep;
    opt.krylov_dim = static_cast<int>(std::min<long>(config.krylov_dim, dim));
    opt.max_matvecs = config.max_matvecs_per_step;

    ArnoldiOptions opt_l = opt;
    if (config.spin_flip_projection) {
      const RMatrix fs = blk_s.flip, fe = blk_e.flip;
      const auto flip_project = [ms, me](RVector& v, const RMatrix& os, const RMatrix& oe) {
        RVector flipped(v.size());
        for (long p = 0; p < ms; ++p)
          for (long b1 = 0; b1 < 2; ++b1)
            for (long b0 = 0; b0 < 2; ++b0)
              for (long a0 = 0; a0 < 2; ++a0)
                for (long pe = 0; pe < me; ++pe)
                  for (long a1 = 0; a1 < 2; ++a1) {
                    const long src = ((((p * 2 + b1) * 2 + b0) * 2 + a0) * me + pe) * 2 + a1;
                    const long dst =
                        ((((p * 2 + (1 - b1)) * 2 + (1 - b0)) * 2 + (1 - a0)) * me + pe) * 2 +
                        (1 - a1);
                    flipped(dst) = v(src);
                  }
        apply_on_factor(flipped, 1, ms, 16 * me, os);       // interior S (slowest factor)
        apply_on_factor(flipped, 8 * ms, me, 2, oe);        // interior E
        v = 0.5 * (v + flipped);
      };
      opt.project = [fs, fe, flip_project](RVector& v) { flip_project(v, fs, fe); };
      const RMatrix fst = fs.transpose(), fet = fe.transpose();
      opt_l.project = [fst, fet, flip_project](RVector& v) { flip_project(v, fst, fet); };
    }

    const ApplyFn apply = [&ctx](const RVector& v) { return apply_superblock(ctx, v); };
    const ApplyFn applyt = [&ctx](const RVector& v) { return apply_superblock_transpose(ctx, v); };
    if (seed_r.size() != dim) seed_r = RVector();
    if (seed_l.size() != dim) seed_l = RVector();

    const ArnoldiResult eig = leading_eigenpair_arnoldi(apply, dim, seed_r, opt);
    if (eig.status == ArnoldiStatus::max_matvecs)
      throw ConvergenceError("tmrg_sweep: right eigenvector did not converge at M = " +
                                 std::to_string(big_m),
                             eig.matvecs, eig.residual);
    if (eig.status == ArnoldiStatus::complex_leading)
      throw NearDegenerateError(
          "tmrg_sweep: leading eigenvalue appears complex at M = " + std::to_string(big_m), 0.0);
    detail::require(eig.lambda > 0.0, "tmrg_sweep: leading eigenvalue not positive");

    const ArnoldiResult eig_l = leading_eigenpair_arnoldi(applyt, dim, seed_l, opt_l);
    if (eig_l.status == ArnoldiStatus::max_matvecs)
      throw ConvergenceError("tmrg_sweep: left eigenvector did not converge at M = " +
                                 std::to_string(big_m),
                             eig_l.matvecs, eig_l.residual);
    if (eig_l.status == ArnoldiStatus::complex_leading)
      throw NearDegenerateError(
          "tmrg_sweep: left eigenvalue appears complex at M = " + std::to_string(big_m), 0.0);
    if (std::abs(eig_l.lambda - eig.lambda) > 1e-6 * std::abs(eig.lambda))
      throw std::runtime_error("tmrg_sweep: left/right eigenvalues disagree at M = " +
                               std::to_string(big_m));

    RVector psi_r = eig.vec;
    {
      Eigen::Index imax = 0;
      psi_r.cwiseAbs().maxCoeff(&imax);
      if (psi_r(imax) < 0) psi_r = -psi_r;
    }
    RVector psi_l = eig_l.vec;
    const double pairing = psi_l.dot(psi_r);
    if (std::abs(pairing) < 1e-14)
      throw NearDegenerateError("tmrg_sweep: left/right pairing vanished", 0.0);
    psi_l /= pairing;

    const RMatrix hs_r = repack_s(psi_r, ms, me), hs_l = repack_s(psi_l, ms, me);
    const RMatrix rho_half_s = hs_r.transpose() * hs_l;
    const RMatrix he_r = repack_e(psi_r, ms, me), he_l = repack_e(psi_l, ms, me);
    const RMatrix rho_half_e = he_r.transpose() * he_l;

    TMRGPoint point;
    if (record) {
      point.temperature = 1.0 / (big_m * config.delta_beta);
      point.trotter_m = big_m;
      point.free_energy = -point.temperature * 0.5 * std::log(eig.lambda);
      if (eig.subleading_modulus > 0.0)
        point.quasi_degenerate = (1.0 - eig.subleading_modulus / eig.lambda) < 1e-10;

      Eigen::Map<const RMatrix> mr(psi_r.data(), 4 * me, 4 * ms);  // [B-part x A-part]
      Eigen::Map<const RMatrix> ml(psi_l.data(), 4 * me, 4 * ms);
      const RMatrix rho_a = mr.transpose() * ml;
      const RMatrix rho_b = mr * ml.transpose();

      std::vector<int> charges_a;
      const std::vector<int>* charges_ptr = nullptr;
      if (model.conserves_sz()) {
        const int sign_b0 = odd_step ? -1 : +1;  // row B_t
        const int sign_b1 = -sign_b0;            // row B_{t-1}
        charges_a.resize(4 * ms);
        for (long p = 0; p < ms; ++p)
          for (long b1 = 0; b1 < 2; ++b1)
            for (long b0 = 0; b0 < 2; ++b0)
              charges_a[p * 4 + b1 * 2 + b0] = blk_s.charges[p] +
                                               sign_b1 * (1 - 2 * static_cast<int>(b1)) +
                                               sign_b0 * (1 - 2 * static_cast<int>(b0));
        charges_ptr = &charges_a;
      }
      point.spectrum = entanglement_spectrum(DenseOperator(rho_a), charges_ptr);
      point.s_bar = point.spectrum.entropy;
      point.s_bar_complement = entanglement_spectrum(DenseOperator(rho_b)).entropy;
    }

    const TruncationResult tr_s = truncate_real(rho_half_s, config.kept_states, config);
    const TruncationResult tr_e = truncate_real(rho_half_e, config.kept_states, config);

    if (record) {
      point.discarded_weight = std::max(tr_s.discarded_weight, tr_e.discarded_weight);
      point.kept = tr_s.kept;
      point.symmetrized_fallback = tr_s.symmetrized_fallback || tr_e.symmetrized_fallback;
      points.push_back(std::move(point));
    }

    Block nblk_s, nblk_e;
    nblk_s.m = tr_s.kept;
    nblk_e.m = tr_e.kept;
    for (int a = 0; a < 4; ++a) {
      if (odd_step) {
        nblk_s.b[a] = update_block_odd(blk_s.b[a], static_cast<int>(ms), gate,
                                       tr_s.right_projector, tr_s.left_projector);
        nblk_e.b[a] = update_block_odd(blk_e.b[a], static_cast<int>(me), gate_slotswap,
                                       tr_e.right_projector, tr_e.left_projector);
      } else {
        nblk_s.b[a] = update_block_even(blk_s.b[a], static_cast<int>(ms), gate,
                                        tr_s.right_projector, tr_s.left_projector);
        nblk_e.b[a] = update_block_even(blk_e.b[a], static_cast<int>(me), gate_slotswap,
                                        tr_e.right_projector, tr_e.left_projector);
      }
    }
    nblk_s.flip =
        update_flip(blk_s.flip, tr_s.right_projector, tr_s.left_projector, static_cast<int>(ms));
    nblk_e.flip =
        update_flip(blk_e.flip, tr_e.right_projector, tr_e.left_projector, static_cast<int>(me));
    if (model.conserves_sz()) {
      const int sign_b1 = odd_step ? +1 : -1;  // row B_{t-1} being absorbed
      nblk_s.charges =
          update_charges(blk_s.charges, sign_b1, tr_s.right_projector, static_cast<int>(ms));
      nblk_e.charges =
          update_charges(blk_e.charges, -sign_b1, tr_e.right_projector, static_cast<int>(me));
    }

    // warm starts for the next step: project the rows being absorbed and wire
    // the fresh explicit pair diagonally
    const auto reseed = [&](const RVector& psi, const RMatrix& proj_s, const RMatrix& proj_e) {
      const long ks = proj_s.cols(), ke = proj_e.cols();
      const RMatrix c_s = repack_s(psi, ms, me) * proj_s;  // [rest x kS]
      RVector nseed = RVector::Zero(16 * ks * ke);
      for (int b0 = 0; b0 < 2; ++b0)
        for (int a0 = 0; a0 < 2; ++a0) {
          RMatrix slice(2 * me, ks);  // rows (a1*mE + pE)
          for (long pe = 0; pe < me; ++pe)
            for (long a1 = 0; a1 < 2; ++a1)
              slice.row(a1 * me + pe) = c_s.row((b0 * 2 + a0) * 2 * me + pe * 2 + a1);
          const RMatrix c_se = proj_e.transpose() * slice;  // [kE x kS]
          for (int fresh = 0; fresh < 2; ++fresh)
            for (long ps = 0; ps < ks; ++ps)
              for (long pe2 = 0; pe2 < ke; ++pe2) {
                const long idx = ((((ps * 2 + b0) * 2 + fresh) * 2 + fresh) * ke + pe2) * 2 + a0;
                nseed(idx) += c_se(pe2, ps) * (1.0 / std::sqrt(2.0));
              }
        }
      return nseed;
    };
    seed_r = reseed(psi_r, tr_s.left_projector, tr_e.left_projector);
    seed_l = reseed(psi_l, tr_s.right_projector, tr_e.right_projector);

    blk_s = std::move(nblk_s);
    blk_e = std::move(nblk_e);
  }

  std::sort(points.begin(), points.end(),
            [](const TMRGPoint& a, const TMRGPoint& b) { return a.temperature > b.temperature; });
  return points;
}

}  // namespace qtm
