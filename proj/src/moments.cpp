#include "shockgp/moments.hpp"

#include <cmath>

#include "shockgp/errors.hpp"

namespace shockgp {

// ---------------------------------------------------------------------------
// Generic route
// ---------------------------------------------------------------------------

double delta_mean(Quantity q, const RegionState& upstream, const FrontMoments& m,
                  const TemperatureModel& temp) {
  const ShockFrontVars front{m.mean_us, m.mean_vz};
  const double plug_in = jump_value(q, upstream, front, temp.a, temp.b);
  const JumpGradient g = jump_derivatives(q, upstream, front, temp.b);
  return plug_in + 0.5 * (g.d2_us2 * m.k_usus + g.d2_vz2 * m.k_vzvz + 2.0 * g.d2_usvz * m.k_usvz);
}

double delta_cov(Quantity ql, Quantity qm, const ExpansionPoint& j, const ExpansionPoint& k,
                 const CrossKernel& cross, double t_slope) {
  const JumpGradient gl = jump_derivatives(ql, j.upstream, j.front(), t_slope);
  const JumpGradient gm = jump_derivatives(qm, k.upstream, k.front(), t_slope);
  return gl.d_us * gm.d_us * cross.k_usus + gl.d_us * gm.d_vz * cross.k_usvz +
         gl.d_vz * gm.d_us * cross.k_vzus + gl.d_vz * gm.d_vz * cross.k_vzvz;
}

StateMoments state_moments(const ExpansionPoint& j, const ExpansionPoint& k, const FrontMoments& mj,
                           const CrossKernel& cross, const TemperatureModel& temp) {
  StateMoments out;
  for (int l = 0; l < 5; ++l) {
    out.mean(l) = delta_mean(kStateOrder[l], j.upstream, mj, temp);
    for (int m = 0; m < 5; ++m) {
      out.cov(l, m) = delta_cov(kStateOrder[l], kStateOrder[m], j, k, cross, temp.b);
    }
  }
  return out;
}

double propagate_independent(std::span<const double> gradient, std::span<const double> stddev) {
  if (gradient.size() != stddev.size()) {
    throw Error(ErrorKind::InvalidArgument, "gradient and stddev sizes differ");
  }
  double var = 0.0;
  for (std::size_t i = 0; i < gradient.size(); ++i) {
    const double t = gradient[i] * stddev[i];
    var += t * t;
  }
  return var;
}

// ---------------------------------------------------------------------------
// Closed-form route
// ---------------------------------------------------------------------------

namespace {

// Shorthand for one expansion point: upstream density r, velocity a, pressure
// pp and energy ep; expansion means u (shock) and v (particle).
struct Point {
  double r, a, pp, ep, u, v;
};

Point unpack(const ExpansionPoint& x) {
  if (!(x.upstream.rho > 0.0)) throw Error(ErrorKind::InvalidArgument, "upstream density <= 0");
  if (!(x.mean_us - x.upstream.nu_z > kDegenerateFrontTol) ||
      !(x.mean_us - x.mean_vz > kDegenerateFrontTol)) {
    throw Error(ErrorKind::DegenerateFront, "expansion point is not a compressive front");
  }
  return {x.upstream.rho, x.upstream.nu_z, x.upstream.P, x.upstream.E, x.mean_us, x.mean_vz};
}

// K_{P_i P_i}^{jk}
double block_pp(const Point& j, const Point& k, const CrossKernel& K) {
  return j.r * (j.v - j.a) * k.r * (k.v - k.a) * K.k_usus +
         j.r * (j.v - j.a) * k.r * (k.u - k.a) * K.k_usvz +
         j.r * (j.u - j.a) * k.r * (k.v - k.a) * K.k_vzus +
         j.r * (j.u - j.a) * k.r * (k.u - k.a) * K.k_vzvz;
}

// K_{rho_i rho_i}^{jk}
double block_rhorho(const Point& j, const Point& k, const CrossKernel& K) {
  const double wj2 = (j.u - j.v) * (j.u - j.v);
  const double wk2 = (k.u - k.v) * (k.u - k.v);
  return (j.r * (j.a - j.v) / wj2) * (k.r * (k.a - k.v) / wk2) * K.k_usus +
         (j.r * (j.a - j.v) / wj2) * (k.r * (k.u - k.a) / wk2) * K.k_usvz +
         (j.r * (j.u - j.a) / wj2) * (k.r * (k.a - k.v) / wk2) * K.k_vzus +
         (j.r * (j.u - j.a) / wj2) * (k.r * (k.u - k.a) / wk2) * K.k_vzvz;
}

// K_{E_i E_i}^{jk}
double block_ee(const Point& j, const Point& k, const CrossKernel& K) {
  const double euj = -(j.pp / j.r) * (j.v - j.a) / ((j.u - j.a) * (j.u - j.a));
  const double euk = -(k.pp / k.r) * (k.v - k.a) / ((k.u - k.a) * (k.u - k.a));
  const double evj = (j.v - j.a) + (j.pp / j.r) / (j.u - j.a);
  const double evk = (k.v - k.a) + (k.pp / k.r) / (k.u - k.a);
  return euj * euk * K.k_usus + euj * evk * K.k_usvz + evj * euk * K.k_vzus +
         evj * evk * K.k_vzvz;
}

// K_{P_i u_s}^{jk}
double block_pus(const Point& j, const CrossKernel& K) {
  return j.r * (j.v - j.a) * K.k_usus + j.r * (j.u - j.a) * K.k_vzus;
}

// K_{P_i nu_z}^{jk}
double block_pvz(const Point& j, const CrossKernel& K) {
  return j.r * (j.v - j.a) * K.k_usvz + j.r * (j.u - j.a) * K.k_vzvz;
}

// K_{P_i rho_i}^{jk}
double block_prho(const Point& j, const Point& k, const CrossKernel& K) {
  const double wk2 = (k.u - k.v) * (k.u - k.v);
  return j.r * (j.v - j.a) * (k.r * (k.a - k.v) / wk2) * K.k_usus +
         j.r * (j.v - j.a) * (k.r * (k.u - k.a) / wk2) * K.k_usvz +
         j.r * (j.u - j.a) * (k.r * (k.a - k.v) / wk2) * K.k_vzus +
         j.r * (j.u - j.a) * (k.r * (k.u - k.a) / wk2) * K.k_vzvz;
}

// K_{P_i E_i}^{jk}
double block_pe(const Point& j, const Point& k, const CrossKernel& K) {
  const double euk = -(k.pp / k.r) * (k.v - k.a) / ((k.u - k.a) * (k.u - k.a));
  const double evk = (k.v - k.a) + (k.pp / k.r) / (k.u - k.a);
  return j.r * (j.v - j.a) * euk * K.k_usus + j.r * (j.v - j.a) * evk * K.k_usvz +
         j.r * (j.u - j.a) * euk * K.k_vzus + j.r * (j.u - j.a) * evk * K.k_vzvz;
}

// K_{rho_i u_s}^{jk}
double block_rhous(const Point& j, const CrossKernel& K) {
  const double wj2 = (j.u - j.v) * (j.u - j.v);
  return j.r * (j.a - j.v) / wj2 * K.k_usus + j.r * (j.u - j.a) / wj2 * K.k_vzus;
}

// K_{rho_i nu_z}^{jk}
double block_rhovz(const Point& j, const CrossKernel& K) {
  const double wj2 = (j.u - j.v) * (j.u - j.v);
  return j.r * (j.a - j.v) / wj2 * K.k_usvz + j.r * (j.u - j.a) / wj2 * K.k_vzvz;
}

// K_{rho_i E_i}^{jk}
double block_rhoe(const Point& j, const Point& k, const CrossKernel& K) {
  const double wj2 = (j.u - j.v) * (j.u - j.v);
  const double euk = -(k.pp / k.r) * (k.v - k.a) / ((k.u - k.a) * (k.u - k.a));
  const double evk = (k.v - k.a) + (k.pp / k.r) / (k.u - k.a);
  return (j.r * (j.a - j.v) / wj2) * euk * K.k_usus + (j.r * (j.a - j.v) / wj2) * evk * K.k_usvz +
         (j.r * (j.u - j.a) / wj2) * euk * K.k_vzus + (j.r * (j.u - j.a) / wj2) * evk * K.k_vzvz;
}

// K_{E_i u_s}^{jk}
double block_eus(const Point& j, const CrossKernel& K) {
  return -(j.pp / j.r) * (j.v - j.a) / ((j.u - j.a) * (j.u - j.a)) * K.k_usus +
         ((j.v - j.a) + (j.pp / j.r) / (j.u - j.a)) * K.k_vzus;
}

// K_{E_i nu_z}^{jk}
double block_evz(const Point& j, const CrossKernel& K) {
  return -(j.pp / j.r) * (j.v - j.a) / ((j.u - j.a) * (j.u - j.a)) * K.k_usvz +
         ((j.v - j.a) + (j.pp / j.r) / (j.u - j.a)) * K.k_vzvz;
}

// Rank in the canonical (row-major) ordering of the written-out blocks; the
// row quantity always has the rank >= the column quantity except for the
// (u_s, nu_z) pair, which is stored both ways.
int rank(Quantity q) {
  switch (q) {
    case Quantity::ShockVelocity: return 0;
    case Quantity::ParticleVelocity: return 1;
    case Quantity::Pressure: return 2;
    case Quantity::Density: return 3;
    case Quantity::Energy: return 4;
    case Quantity::Temperature: return 4;
  }
  return -1;
}

double energy_block(Quantity ql, Quantity qm, const Point& j, const Point& k,
                    const CrossKernel& K) {
  // ql has rank >= qm here, with temperature already mapped to energy.
  const int rl = rank(ql), rm = rank(qm);
  if (rl < 2) {
    if (ql == Quantity::ShockVelocity) {
      return qm == Quantity::ShockVelocity ? K.k_usus : K.k_usvz;
    }
    return qm == Quantity::ShockVelocity ? K.k_vzus : K.k_vzvz;
  }
  switch (rl) {
    case 2:  // pressure row
      if (rm == 0) return block_pus(j, K);
      if (rm == 1) return block_pvz(j, K);
      return block_pp(j, k, K);
    case 3:  // density row
      if (rm == 0) return block_rhous(j, K);
      if (rm == 1) return block_rhovz(j, K);
      if (rm == 2) return block_prho(k, j, K.transposed());
      return block_rhorho(j, k, K);
    case 4:  // energy row
      if (rm == 0) return block_eus(j, K);
      if (rm == 1) return block_evz(j, K);
      if (rm == 2) return block_pe(k, j, K.transposed());
      if (rm == 3) return block_rhoe(k, j, K.transposed());
      return block_ee(j, k, K);
    default: break;
  }
  return 0.0;
}

}  // namespace

double explicit_mean(Quantity q, const RegionState& upstream, const FrontMoments& m,
                     const TemperatureModel& temp) {
  const Point p = unpack({upstream, m.mean_us, m.mean_vz});
  switch (q) {
    case Quantity::ShockVelocity: return p.u;
    case Quantity::ParticleVelocity: return p.v;
    case Quantity::Pressure:
      return p.r * (p.u - p.a) * (p.v - p.a) + p.pp + p.r * m.k_usvz;
    case Quantity::Density: {
      const double w = p.u - p.v;
      return p.r * (p.u - p.a) / w +
             p.r *
                 ((p.v - p.a) * m.k_usus + (p.u - p.a) * m.k_vzvz +
                  (2.0 * p.a - p.u - p.v) * m.k_usvz) /
                 (w * w * w);
    }
    case Quantity::Energy:
    case Quantity::Temperature: {
      const double g = p.u - p.a;
      const double c = p.pp / p.r;
      const double e = p.ep + 0.5 * (p.v - p.a) * (p.v - p.a) + c * (p.v - p.a) / g +
                       0.5 * (2.0 * c * (p.v - p.a) / (g * g * g) * m.k_usus + m.k_vzvz -
                              2.0 * c / (g * g) * m.k_usvz);
      return q == Quantity::Energy ? e : temp.a + temp.b * e;
    }
  }
  return 0.0;
}

double explicit_block(Quantity ql, Quantity qm, const ExpansionPoint& j, const ExpansionPoint& k,
                      const CrossKernel& cross, double t_slope) {
  double factor = 1.0;
  if (ql == Quantity::Temperature) factor *= t_slope;
  if (qm == Quantity::Temperature) factor *= t_slope;
  const Point pj = unpack(j);
  const Point pk = unpack(k);
  if (rank(ql) >= rank(qm)) return factor * energy_block(ql, qm, pj, pk, cross);
  // Upper-triangle request: Cov(l at j, m at k) = Cov(m at k, l at j).
  return factor * energy_block(qm, ql, pk, pj, cross.transposed());
}

}  // namespace shockgp
