#include "hbrd/api.hpp"

#include <algorithm>
#include <variant>

namespace hbrd {

RateOutcome compute_rate(const ProblemInstance& inst, const DistortionSpec& spec,
                         const SolverConfig& cfg, bool swapped) {
  RateOutcome out;
  out.canon = canonicalize(inst, spec);
  switch (family_of(spec)) {
    case Family::Mse:
      out.report = rate_mse_closed(out.canon, std::get<MseDiag>(spec));
      break;
    case Family::ScaledIdentity:
      out.report = rate_sc_closed(out.canon, std::get<ScaledIdentity>(spec));
      break;
    case Family::Trace: {
      const Trace& tr = std::get<Trace>(spec);
      if (swapped) {
        SwappedSolution s = solve_maximin_swapped(out.canon, tr, cfg);
        out.report = std::move(s.report);
        out.argmin = std::move(s.argmin1);
        out.argmin2 = std::move(s.argmin2);
      } else {
        TraceSolution s = solve_minimax(out.canon, tr, cfg);
        out.report = std::move(s.report);
        out.argmin = std::move(s.vars);
      }
      break;
    }
  }
  return out;
}

DistortionSpec with_distortion(const DistortionSpec& spec, SweepAxis axis,
                               double value) {
  const bool first = axis != SweepAxis::D2;
  const bool second = axis != SweepAxis::D1;
  if (const auto* m = std::get_if<MseDiag>(&spec)) {
    MseDiag out = *m;
    if (first) out.d1 = DiagMatrix(m->d1.entries() * value);
    if (second) out.d2 = DiagMatrix(m->d2.entries() * value);
    return out;
  }
  return std::visit(
      [&](auto s) -> DistortionSpec {
        if constexpr (!std::is_same_v<decltype(s), MseDiag>) {
          if (first) s.d1 = value;
          if (second) s.d2 = value;
        }
        return s;
      },
      spec);
}

std::vector<SweepRow> sweep(const ProblemInstance& inst,
                            const DistortionSpec& spec, SweepAxis axis,
                            double lo, double hi, int steps,
                            const SolverConfig& cfg, bool swapped) {
  if (steps < 1) {
    throw Error(ErrorCode::DimensionMismatch, "sweep needs at least one step");
  }
  std::vector<SweepRow> rows;
  rows.reserve(steps);
  for (int i = 0; i < steps; ++i) {
    SweepRow row;
    row.value = steps == 1 ? lo : lo + (hi - lo) * i / double(steps - 1);
    const DistortionSpec s = with_distortion(spec, axis, row.value);
    const ValidationReport v = validate(inst, s);
    if (!v.ok()) {
      row.note = std::string(to_string(v.issues.front().code));
    } else {
      row.report = compute_rate(inst, s, cfg, swapped).report;
      row.feasible = true;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double sweep_monotonicity_violation(const std::vector<SweepRow>& rows) {
  std::vector<const SweepRow*> feasible;
  for (const auto& r : rows) {
    if (r.feasible) feasible.push_back(&r);
  }
  std::sort(feasible.begin(), feasible.end(),
            [](const SweepRow* a, const SweepRow* b) { return a->value < b->value; });
  double worst = 0.0;
  for (std::size_t i = 1; i < feasible.size(); ++i) {
    worst = std::max(worst, feasible[i]->report.r - feasible[i - 1]->report.r);
  }
  return worst;
}

}  // namespace hbrd
