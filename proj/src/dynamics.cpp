#include "biaspot/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace biaspot {

namespace {

std::vector<double> target_embedding_of(const Target& target, const FeatureSet& features) {
  return target.kind == Target::Kind::population ? mean_embedding(target.density, features)
                                                 : mean_embedding(target.samples, features);
}

// v = Phi (e_target - e_Q) / m on the grid, then centered under Q
std::vector<double> centered_velocity(const FeatureGrid& fg, const GridDensity& q,
                                      std::span<const double> target_embedding) {
  std::vector<double> diff = fg.embedding(q.mass);
  for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = target_embedding[j] - diff[j];
  std::vector<double> v = fg.potential_values(diff);  // (1/m) Phi diff
  double mean = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) mean += q.mass[i] * v[i];
  for (double& vi : v) vi -= mean;
  return v;
}

}  // namespace

std::vector<double> velocity_field(const GridDensity& q, const Target& target,
                                   const FeatureSet& features) {
  if (q.grid.d != features.d || target.dim() != features.d) {
    throw std::invalid_argument("velocity_field: dimension mismatch");
  }
  FeatureGrid fg = FeatureGrid::build(features, q.grid);
  return centered_velocity(fg, q, target_embedding_of(target, features));
}

FlowTrajectory evolve_measure(const GridDensity& q0, const Target& target,
                              const FeatureSet& features, const MeasureFlowConfig& cfg) {
  if (cfg.dt <= 0.0) throw std::invalid_argument("evolve_measure: dt must be > 0");
  FeatureGrid fg = FeatureGrid::build(features, q0.grid);
  std::vector<double> te = target_embedding_of(target, features);

  FlowTrajectory out;
  GridDensity q = q0;
  const std::size_t record_every = std::max<std::size_t>(1, cfg.record_every);
  std::set<std::size_t> snapshots(cfg.snapshot_steps.begin(), cfg.snapshot_steps.end());

  auto mmd_now = [&] {
    std::vector<double> e = fg.embedding(q.mass);
    for (std::size_t j = 0; j < e.size(); ++j) e[j] -= te[j];
    return mmd_sq_from_embedding(e);
  };

  double elapsed = 0.0;
  for (std::size_t step = 0; step <= cfg.steps; ++step) {
    std::vector<double> vbar = centered_velocity(fg, q, te);
    double max_vbar = 0.0;
    for (double vi : vbar) max_vbar = std::max(max_vbar, std::abs(vi));

    if (step % record_every == 0 || step == cfg.steps) {
      FlowRecord rec;
      rec.step = step;
      rec.time = elapsed;
      rec.mmd_sq = mmd_now();
      rec.min_mass = *std::min_element(q.mass.begin(), q.mass.end());
      rec.max_vbar = max_vbar;
      out.records.push_back(rec);
    }
    if (snapshots.count(step)) out.snapshots[step] = q;
    if (step == cfg.steps) break;

    double dt = cfg.dt;
    if (cfg.dt_policy == MeasureFlowConfig::DtPolicy::adaptive && max_vbar > 0.0) {
      // positivity: draining cells keep at least a tenth of their mass
      double max_drain = 0.0;
      for (double vi : vbar) max_drain = std::max(max_drain, -vi);
      if (max_drain > 0.0) dt = std::min(dt, 0.9 / max_drain);
      // exact step response of the Lyapunov function:
      //   mmd^2 changes by -2 dt E_Q[vbar^2] + dt^2 ||vbar Q||_k^2,
      // so every dt below 2 E_Q[vbar^2] / ||vbar Q||_k^2 descends
      double ev2 = 0.0;
      std::vector<double> vq(q.mass.size());
      for (std::size_t i = 0; i < q.mass.size(); ++i) {
        ev2 += q.mass[i] * vbar[i] * vbar[i];
        vq[i] = q.mass[i] * vbar[i];
      }
      double norm_vq = mmd_sq_from_embedding(fg.embedding(vq));
      if (norm_vq > 0.0) dt = std::min(dt, 1.9 * ev2 / norm_vq);
    }
    for (;;) {
      bool negative = false;
      for (std::size_t i = 0; i < q.mass.size(); ++i) {
        if (q.mass[i] * (1.0 + dt * vbar[i]) < 0.0) {
          negative = true;
          break;
        }
      }
      if (!negative) break;
      dt *= 0.5;  // fixed-dt step would cross zero; retry smaller
      ++out.rejected_steps;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < q.mass.size(); ++i) {
      q.mass[i] *= 1.0 + dt * vbar[i];
      total += q.mass[i];
    }
    elapsed += dt;
    double drift = std::abs(total - 1.0);
    if (!out.records.empty()) out.records.back().drift = std::max(out.records.back().drift, drift);
    if (drift > 1e-12) {
      for (double& mi : q.mass) mi /= total;
      ++out.renormalizations;
    }
  }

  out.final_density = std::move(q);
  out.total_time = elapsed;
  return out;
}

EquivalenceReport potential_flow_equivalence_check(const Potential& init, const Target& target,
                                                   const Grid& grid, std::size_t steps,
                                                   double eta) {
  if (eta <= 0.0) throw std::invalid_argument("potential_flow_equivalence_check: eta must be > 0");
  FeatureGrid fg = FeatureGrid::build(init.features, grid);
  std::vector<double> te = target_embedding_of(target, init.features);

  std::vector<double> a = init.coeffs;                     // coefficient flow
  std::vector<double> v_direct = fg.potential_values(a);   // potential-space flow
  EquivalenceReport report;

  auto center_to_p_mean = [](std::vector<double> v) {
    double mean = 0.0;
    for (double vi : v) mean += vi;
    mean /= static_cast<double>(v.size());
    for (double& vi : v) vi -= mean;
    return v;
  };

  for (std::size_t step = 0; step <= steps; ++step) {
    std::vector<double> v_from_a = center_to_p_mean(fg.potential_values(a));
    std::vector<double> v_ref = center_to_p_mean(v_direct);
    double dev = 0.0;
    for (std::size_t i = 0; i < v_ref.size(); ++i) {
      dev = std::max(dev, std::abs(v_from_a[i] - v_ref[i]));
    }
    report.per_step_deviation.push_back(dev);
    report.max_deviation = std::max(report.max_deviation, dev);
    if (step == steps) break;

    // coefficient step: a <- a - eta (E_target[sigma] - E_Q[sigma])
    GridDensity q_a = density_from_values(grid, fg.potential_values(a));
    std::vector<double> e_a = fg.embedding(q_a.mass);
    for (std::size_t j = 0; j < a.size(); ++j) a[j] -= eta * (te[j] - e_a[j]);

    // potential step: V <- V + eta E_{Q - target}[k(x, .)]
    GridDensity q_v = density_from_values(grid, v_direct);
    std::vector<double> e_v = fg.embedding(q_v.mass);
    for (std::size_t j = 0; j < e_v.size(); ++j) e_v[j] -= te[j];
    std::vector<double> kick = fg.potential_values(e_v);  // (1/m) Phi (e_Q - e_target)
    for (std::size_t i = 0; i < v_direct.size(); ++i) v_direct[i] += eta * kick[i];
  }
  return report;
}

}  // namespace biaspot
