// Copyright 2026 The DWE Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dwe/exact_ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "dwe/error.hpp"

namespace dwe {
namespace {

constexpr double kPricingTolerance = 1e-9;

struct Point {
  std::size_t bin;
  int row;
  int col;
  double mass;
};

// Network simplex on the complete bipartite graph between two supports.
// The basis is a spanning tree over m + n nodes (sources first, then
// sinks) with exactly m + n - 1 arc slots; an entering arc reuses the slot
// of the arc it replaces. Costs are integers, so potentials and reduced
// costs are computed exactly in double precision.
class NetworkSimplex {
 public:
  NetworkSimplex(std::vector<Point> sources, std::vector<Point> sinks, std::size_t bland_after)
      : src_(std::move(sources)), dst_(std::move(sinks)), m_(static_cast<int>(src_.size())),
        n_(static_cast<int>(dst_.size())), bland_after_(bland_after) {
    dst_row_.reserve(n_);
    dst_col_.reserve(n_);
    for (const auto& p : dst_) {
      dst_row_.push_back(p.row);
      dst_col_.push_back(p.col);
    }
    block_ = std::max<std::size_t>(16, static_cast<std::size_t>(std::sqrt(double(m_) * double(n_))));
  }

  void run() {
    northwest_corner();
    build_tree();
    int ei = 0, ej = 0;
    while (true) {
      const bool bland = stats_.pivots >= bland_after_;
      stats_.used_bland = stats_.used_bland || bland;
      const bool found = bland ? find_entering_bland(ei, ej) : find_entering_block(ei, ej);
      if (!found) break;
      pivot(ei, ej);
      ++stats_.pivots;
    }
  }

  double cost(int i, int j) const {
    const int dr = src_[i].row - dst_[j].row;
    const int dc = src_[i].col - dst_[j].col;
    return static_cast<double>(dr * dr + dc * dc);
  }

  int sources() const { return m_; }
  int sinks() const { return n_; }
  const Point& source(int i) const { return src_[i]; }
  const Point& sink(int j) const { return dst_[j]; }
  std::size_t arcs() const { return flow_.size(); }
  int arc_source(std::size_t a) const { return arc_src_[a]; }
  int arc_sink(std::size_t a) const { return arc_dst_[a]; }
  double arc_flow(std::size_t a) const { return flow_[a]; }
  double source_potential(int i) const { return pot_[i]; }
  double sink_potential(int j) const { return pot_[m_ + j]; }
  const SolveStats& stats() const { return stats_; }

 private:
  void add_arc(int i, int j, double f) {
    const int slot = static_cast<int>(flow_.size());
    arc_src_.push_back(i);
    arc_dst_.push_back(j);
    flow_.push_back(f);
    adj_[i].push_back(slot);
    adj_[m_ + j].push_back(slot);
  }

  // Staircase basis: every step advances exactly one of the two cursors, so
  // the m + n - 1 arcs form a spanning tree even when both sides exhaust at
  // once (the extra arc then carries zero flow).
  void northwest_corner() {
    adj_.assign(m_ + n_, {});
    arc_src_.reserve(m_ + n_ - 1);
    arc_dst_.reserve(m_ + n_ - 1);
    flow_.reserve(m_ + n_ - 1);
    int i = 0, j = 0;
    double supply = src_[0].mass, demand = dst_[0].mass;
    while (true) {
      const double f = std::max(0.0, std::min(supply, demand));
      add_arc(i, j, f);
      supply -= f;
      demand -= f;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (i < m_ - 1 && (j == n_ - 1 || supply <= demand)) {
        ++i;
        supply = src_[i].mass;
      } else {
        ++j;
        demand = dst_[j].mass;
      }
    }
  }

  int other_end(int slot, int node) const { return node < m_ ? m_ + arc_dst_[slot] : arc_src_[slot]; }

  double arc_cost(int slot) const { return cost(arc_src_[slot], arc_dst_[slot]); }

  // Sets parent/depth/potential for every node reachable from `start`
  // without crossing `via`, with `start` hanging from `parent` through `via`.
  void hang(int start, int parent, int via) {
    stack_.clear();
    stack_.push_back({start, parent, via});
    while (!stack_.empty()) {
      const auto [x, px, a] = stack_.back();
      stack_.pop_back();
      parent_[x] = px;
      parent_arc_[x] = a;
      if (px < 0) {
        depth_[x] = 0;
        pot_[x] = 0.0;
      } else {
        depth_[x] = depth_[px] + 1;
        pot_[x] = arc_cost(a) - pot_[px];
      }
      for (int b : adj_[x])
        if (b != a) stack_.push_back({other_end(b, x), x, b});
    }
  }

  void build_tree() {
    parent_.assign(m_ + n_, -1);
    parent_arc_.assign(m_ + n_, -1);
    depth_.assign(m_ + n_, 0);
    pot_.assign(m_ + n_, 0.0);
    hang(0, -1, -1);
  }

  // Block search: scan arcs cyclically in blocks, taking the most negative
  // reduced cost of the first block that contains any candidate.
  bool find_entering_block(int& ei, int& ej) {
    const std::size_t total = std::size_t(m_) * std::size_t(n_);
    double best = -kPricingTolerance;
    bool found = false;
    std::size_t scanned = 0, in_block = 0;
    int i = next_i_, j = next_j_;
    while (scanned < total) {
      const double ui = pot_[i];
      const double* v = pot_.data() + m_;
      const int r = src_[i].row, c = src_[i].col;
      const int stop = std::min<std::size_t>(n_, j + (block_ - in_block));
      for (int jj = j; jj < stop; ++jj) {
        const int dr = r - dst_row_[jj], dc = c - dst_col_[jj];
        const double rc = double(dr * dr + dc * dc) - ui - v[jj];
        if (rc < best) {
          best = rc;
          ei = i;
          ej = jj;
          found = true;
        }
      }
      const std::size_t step = std::size_t(stop - j);
      scanned += step;
      in_block += step;
      j = stop;
      if (j == n_) {
        j = 0;
        i = (i + 1 == m_) ? 0 : i + 1;
      }
      if (in_block >= block_) {
        if (found) break;
        in_block = 0;
      }
    }
    next_i_ = i;
    next_j_ = j;
    return found;
  }

  bool find_entering_bland(int& ei, int& ej) const {
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j)
        if (cost(i, j) - pot_[i] - pot_[m_ + j] < -kPricingTolerance) {
          ei = i;
          ej = j;
          return true;
        }
    return false;
  }

  std::size_t global_index(int slot) const {
    return std::size_t(arc_src_[slot]) * std::size_t(n_) + std::size_t(arc_dst_[slot]);
  }

  // Pushing theta along the entering arc i -> j forces flow back along the
  // tree path from j to i; tree arcs traversed sink->source lose theta and
  // arcs traversed source->sink gain it.
  void pivot(int ei, int ej) {
    const int a = ei, b = m_ + ej;
    cycle_.clear();
    int u = b, w = a;
    auto step_sink_side = [&](int x) {
      cycle_.push_back({parent_arc_[x], x >= m_ ? -1 : +1, true});
      return parent_[x];
    };
    auto step_source_side = [&](int x) {
      cycle_.push_back({parent_arc_[x], x < m_ ? -1 : +1, false});
      return parent_[x];
    };
    while (depth_[u] > depth_[w]) u = step_sink_side(u);
    while (depth_[w] > depth_[u]) w = step_source_side(w);
    while (u != w) {
      u = step_sink_side(u);
      w = step_source_side(w);
    }

    double theta = std::numeric_limits<double>::infinity();
    int leave = -1;
    bool leave_on_sink_side = false;
    for (const auto& e : cycle_) {
      if (e.sign > 0) continue;
      const double f = flow_[e.slot];
      if (f < theta || (f == theta && global_index(e.slot) < global_index(leave))) {
        theta = f;
        leave = e.slot;
        leave_on_sink_side = e.sink_side;
      }
    }
    if (theta == 0.0) ++stats_.degenerate_pivots;
    for (const auto& e : cycle_)
      flow_[e.slot] = e.sign > 0 ? flow_[e.slot] + theta : std::max(0.0, flow_[e.slot] - theta);

    // Detach the leaving arc and reuse its slot for the entering arc.
    const int ls = arc_src_[leave], lt = m_ + arc_dst_[leave];
    erase_adj(ls, leave);
    erase_adj(lt, leave);
    arc_src_[leave] = ei;
    arc_dst_[leave] = ej;
    flow_[leave] = theta;
    adj_[a].push_back(leave);
    adj_[b].push_back(leave);
    // The endpoint of the entering arc on the same side as the leaving arc
    // sits inside the detached subtree.
    if (leave_on_sink_side)
      hang(b, a, leave);
    else
      hang(a, b, leave);
  }

  void erase_adj(int node, int slot) {
    auto& list = adj_[node];
    auto it = std::find(list.begin(), list.end(), slot);
    *it = list.back();
    list.pop_back();
  }

  struct CycleArc {
    int slot;
    int sign;
    bool sink_side;
  };
  struct Frame {
    int node;
    int parent;
    int via;
  };

  std::vector<Point> src_, dst_;
  std::vector<int> dst_row_, dst_col_;
  int m_, n_;
  std::size_t bland_after_;
  std::size_t block_;
  int next_i_ = 0, next_j_ = 0;

  std::vector<int> arc_src_, arc_dst_;
  std::vector<double> flow_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> parent_, parent_arc_, depth_;
  std::vector<double> pot_;
  std::vector<Frame> stack_;
  std::vector<CycleArc> cycle_;
  SolveStats stats_;
};

std::vector<Point> to_points(std::span<const SupportEntry> entries, const GroundCost& cost, const char* side) {
  std::vector<Point> pts;
  pts.reserve(entries.size());
  double total = 0.0;
  for (const auto& e : entries) {
    if (e.bin >= cost.bins()) fail(ErrorKind::IndexError, std::string(side) + " support bin outside the grid");
    if (!(e.mass >= 0.0) || !std::isfinite(e.mass)) fail(ErrorKind::NegativeEntry, std::string(side) + " mass invalid");
    if (e.mass == 0.0) continue;
    pts.push_back({e.bin, static_cast<int>(e.bin / cost.width()), static_cast<int>(e.bin % cost.width()), e.mass});
    total += e.mass;
  }
  if (pts.empty()) fail(ErrorKind::EmptySupport, std::string(side) + " support is empty");
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << side << " mass sums to " << total << ", expected 1";
    fail(ErrorKind::InvalidArgument, os.str());
  }
  for (auto& p : pts) p.mass /= total;
  return pts;
}

}  // namespace

ExactResult solve_transport(std::span<const SupportEntry> source, std::span<const SupportEntry> target,
                            const GroundCost& cost, const SolverOptions& options) {
  auto src = to_points(source, cost, "source");
  auto dst = to_points(target, cost, "target");
  if (src.size() > options.capacity || dst.size() > options.capacity) {
    std::ostringstream os;
    os << "support sizes " << src.size() << " and " << dst.size() << " exceed capacity " << options.capacity;
    fail(ErrorKind::CapacityExceeded, os.str());
  }
  if (options.shuffle_initial_basis) {
    std::mt19937_64 rng(options.shuffle_seed);
    std::shuffle(src.begin(), src.end(), rng);
    std::shuffle(dst.begin(), dst.end(), rng);
  }
  const std::size_t bland_after =
      options.bland_after != 0 ? options.bland_after : 100 * (src.size() + dst.size()) + 10000;

  NetworkSimplex solver(std::move(src), std::move(dst), bland_after);
  solver.run();

  const int m = solver.sources(), n = solver.sinks();
  ExactResult result;
  result.stats = solver.stats();
  auto& plan = result.plan;
  std::vector<double> row(m, 0.0), col(n, 0.0);
  double objective = 0.0;
  for (std::size_t a = 0; a < solver.arcs(); ++a) {
    const double f = solver.arc_flow(a);
    if (f <= 0.0) continue;
    const int i = solver.arc_source(a), j = solver.arc_sink(a);
    plan.entries.push_back({solver.source(i).bin, solver.sink(j).bin, f});
    objective += f * solver.cost(i, j);
    row[i] += f;
    col[j] += f;
  }
  std::sort(plan.entries.begin(), plan.entries.end(), [](const PlanEntry& x, const PlanEntry& y) {
    return x.source_bin != y.source_bin ? x.source_bin < y.source_bin : x.target_bin < y.target_bin;
  });
  plan.objective = objective;

  auto& cert = result.certificate;
  double dual = 0.0;
  for (int i = 0; i < m; ++i) {
    plan.source_marginal_error = std::max(plan.source_marginal_error, std::abs(row[i] - solver.source(i).mass));
    cert.source_bins.push_back(solver.source(i).bin);
    cert.source_potentials.push_back(solver.source_potential(i));
    dual += solver.source_potential(i) * solver.source(i).mass;
  }
  for (int j = 0; j < n; ++j) {
    plan.target_marginal_error = std::max(plan.target_marginal_error, std::abs(col[j] - solver.sink(j).mass));
    cert.target_bins.push_back(solver.sink(j).bin);
    cert.target_potentials.push_back(solver.sink_potential(j));
    dual += solver.sink_potential(j) * solver.sink(j).mass;
  }
  cert.duality_gap = objective - dual;
  result.objective = objective;
  return result;
}

ExactResult w2_exact(const Histogram& a, const Histogram& b, const SolverOptions& options) {
  if (!a.same_shape(b)) fail(ErrorKind::DimensionMismatch, "histograms live on different grids");
  const GroundCost cost(a.height(), a.width());
  const auto sa = support(a, 0.0);
  const auto sb = support(b, 0.0);
  return solve_transport(sa.entries, sb.entries, cost, options);
}

double w2_1d(const Histogram& a, const Histogram& b) {
  if (a.height() != 1 || b.height() != 1) fail(ErrorKind::DimensionMismatch, "w2_1d needs single-row histograms");
  if (a.width() != b.width()) fail(ErrorKind::DimensionMismatch, "histogram widths differ");
  const std::size_t n = a.width();
  // Walk both step CDFs in lockstep; each overlap of a quantile interval of
  // a with one of b contributes (length) * (bin distance)^2.
  std::size_t i = 0, j = 0;
  auto skip_empty = [n](const Histogram& h, std::size_t k) {
    while (k < n && h[k] == 0.0) ++k;
    return k;
  };
  i = skip_empty(a, 0);
  j = skip_empty(b, 0);
  double ra = i < n ? a[i] : 0.0, rb = j < n ? b[j] : 0.0;
  double total = 0.0;
  while (i < n && j < n) {
    const double d = static_cast<double>(i) - static_cast<double>(j);
    if (ra < rb) {
      total += ra * d * d;
      rb -= ra;
      i = skip_empty(a, i + 1);
      ra = i < n ? a[i] : 0.0;
    } else if (rb < ra) {
      total += rb * d * d;
      ra -= rb;
      j = skip_empty(b, j + 1);
      rb = j < n ? b[j] : 0.0;
    } else {
      total += ra * d * d;
      i = skip_empty(a, i + 1);
      j = skip_empty(b, j + 1);
      ra = i < n ? a[i] : 0.0;
      rb = j < n ? b[j] : 0.0;
    }
  }
  return total;
}

OptimalityReport verify_optimality(const TransportPlan& plan, const DualCertificate& cert, const GroundCost& cost) {
  OptimalityReport report;
  std::ostringstream diag;
  if (cert.source_bins.size() != cert.source_potentials.size() ||
      cert.target_bins.size() != cert.target_potentials.size()) {
    report.diagnostic = "certificate arrays have inconsistent lengths";
    return report;
  }
  for (std::size_t i = 0; i < cert.source_bins.size(); ++i)
    for (std::size_t j = 0; j < cert.target_bins.size(); ++j) {
      const double excess = cert.source_potentials[i] + cert.target_potentials[j] -
                            cost(cert.source_bins[i], cert.target_bins[j]);
      report.max_dual_violation = std::max(report.max_dual_violation, excess);
    }

  auto index_of = [](const std::vector<std::size_t>& bins, std::size_t bin) -> long {
    auto it = std::lower_bound(bins.begin(), bins.end(), bin);
    if (it != bins.end() && *it == bin) return it - bins.begin();
    auto lin = std::find(bins.begin(), bins.end(), bin);
    return lin == bins.end() ? -1 : lin - bins.begin();
  };

  std::vector<double> row(cert.source_bins.size(), 0.0), col(cert.target_bins.size(), 0.0);
  double objective = 0.0;
  bool unknown_bin = false;
  for (const auto& e : plan.entries) {
    if (e.mass < 0.0) {
      diag << "negative plan entry; ";
      report.max_slackness_violation = std::numeric_limits<double>::infinity();
      continue;
    }
    const long i = index_of(cert.source_bins, e.source_bin);
    const long j = index_of(cert.target_bins, e.target_bin);
    if (i < 0 || j < 0) {
      unknown_bin = true;
      continue;
    }
    const double c = cost(e.source_bin, e.target_bin);
    objective += e.mass * c;
    row[i] += e.mass;
    col[j] += e.mass;
    if (e.mass > 0.0) {
      const double slack = std::abs(cert.source_potentials[i] + cert.target_potentials[j] - c);
      report.max_slackness_violation = std::max(report.max_slackness_violation, slack);
    }
  }
  double dual = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) dual += cert.source_potentials[i] * row[i];
  for (std::size_t j = 0; j < col.size(); ++j) dual += cert.target_potentials[j] * col[j];
  report.duality_gap = objective - dual;

  const double gap_bound = kCertificateTolerance * (1.0 + std::abs(objective));
  bool ok = true;
  if (unknown_bin) {
    diag << "plan references bins absent from the certificate; ";
    ok = false;
  }
  if (report.max_dual_violation > kCertificateTolerance) {
    diag << "dual infeasible by " << report.max_dual_violation << "; ";
    ok = false;
  }
  if (report.max_slackness_violation > kCertificateTolerance) {
    diag << "complementary slackness violated by " << report.max_slackness_violation << "; ";
    ok = false;
  }
  if (std::abs(report.duality_gap) > gap_bound || std::abs(cert.duality_gap) > gap_bound) {
    diag << "duality gap " << report.duality_gap << " (certificate reports " << cert.duality_gap << "); ";
    ok = false;
  }
  if (std::abs(objective - plan.objective) > 1e-9 * std::max(1.0, std::abs(objective))) {
    diag << "plan objective " << plan.objective << " differs from recomputed " << objective << "; ";
    ok = false;
  }
  report.ok = ok;
  report.diagnostic = ok ? "OK" : diag.str();
  return report;
}

}  // namespace dwe
