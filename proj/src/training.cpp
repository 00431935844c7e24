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

#include "dwe/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <thread>
#include <utility>

#include "dwe/binary_io.hpp"

namespace dwe {
namespace {

constexpr char kPairMagic[4] = {'W', 'P', 'R', '1'};
constexpr std::size_t kPairRecordBytes = 4 + 4 + 8;
constexpr std::size_t kPairHeaderBytes = 4 + 8 + 4;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Draw {
  std::uint32_t idx1, idx2;
};

std::vector<Draw> draw_pairs(std::size_t collection_size, std::size_t n_pairs, std::uint64_t seed, bool self_pairs) {
  if (collection_size == 0) fail(ErrorKind::InvalidArgument, "pair generation needs a nonempty collection");
  if (n_pairs == 0) fail(ErrorKind::InvalidArgument, "pair generation needs n_pairs >= 1");
  if (collection_size > std::numeric_limits<std::uint32_t>::max())
    fail(ErrorKind::InvalidArgument, "collection too large for 32-bit pair indices");
  std::vector<Draw> draws(n_pairs);
  if (collection_size == 1) return draws;
  std::mt19937_64 rng(seed);
  const auto n = static_cast<std::uint32_t>(collection_size);
  std::uniform_int_distribution<std::uint32_t> first(0, n - 1);
  std::uniform_int_distribution<std::uint32_t> second(0, self_pairs ? n - 1 : n - 2);
  for (auto& d : draws) {
    d.idx1 = first(rng);
    d.idx2 = second(rng);
    if (!self_pairs && d.idx2 >= d.idx1) ++d.idx2;
  }
  return draws;
}

double certified_label(const Histogram& a, const Histogram& b, const SolverOptions& solver) {
  if (&a == &b) return 0.0;
  const ExactResult r = w2_exact(a, b, solver);
  const OptimalityReport rep = verify_optimality(r.plan, r.certificate, GroundCost(a.height(), a.width()));
  if (!rep) fail(ErrorKind::WorkerFailure, "optimality certificate rejected: " + rep.diagnostic);
  return r.objective;
}

// Labels draws[start..) into out (already sized, out[0..start) prefilled).
void label_draws(std::span<const Histogram> collection, std::span<const Draw> draws, std::size_t start,
                 std::uint64_t seed, const PairGenOptions& opts, std::vector<PairSample>& out) {
  if (opts.workers == 0) fail(ErrorKind::InvalidArgument, "workers must be at least 1");
  const std::size_t n = draws.size();
  std::vector<std::uint8_t> done(n, 0);
  std::fill(done.begin(), done.begin() + static_cast<std::ptrdiff_t>(start), 1);
  std::atomic<std::size_t> next{start};
  std::atomic<bool> stop{false};
  std::mutex failure_mutex;
  std::size_t failure_index = n;
  std::exception_ptr failure;

  auto work = [&]() {
    while (!stop.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        const auto& d = draws[i];
        out[i] = PairSample{d.idx1, d.idx2, certified_label(collection[d.idx1], collection[d.idx2], opts.solver)};
        done[i] = 1;
        if (opts.on_labelled) opts.on_labelled(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (i < failure_index) {
          failure_index = i;
          failure = std::current_exception();
        }
        stop = true;
        return;
      }
    }
  };

  const std::size_t workers = std::min(opts.workers, n - std::min(n, start));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (!failure) return;

  try {
    std::rethrow_exception(failure);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::CapacityExceeded) throw;
  } catch (...) {
  }
  std::size_t completed = 0;
  while (completed < n && done[completed]) ++completed;
  std::string what = "pair " + std::to_string(failure_index) + " failed";
  try {
    std::rethrow_exception(failure);
  } catch (const std::exception& e) {
    what += ": ";
    what += e.what();
  } catch (...) {
  }
  throw PairGenerationError(what, ResumeToken{seed, n, completed},
                            std::vector<PairSample>(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(completed)));
}

std::vector<double> as_vector(const Histogram& h) { return {h.mass().begin(), h.mass().end()}; }

Tensor image_tensor(const Histogram& h) { return Tensor({1, h.height(), h.width()}, as_vector(h)); }

void require_finite(double v, std::size_t epoch, std::size_t batch, const char* term) {
  if (!std::isfinite(v))
    fail(ErrorKind::NonFiniteLoss, "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + ", term " +
                                       term + " is " + std::to_string(v));
}

void finish_total(LossTerms& t, const TrainConfig& cfg) {
  t.total = t.distance + cfg.lambda * t.kl + cfg.sparsity_weight * t.sparsity;
}

void check_indices(std::span<const PairSample> pairs, std::size_t n) {
  for (const auto& p : pairs)
    if (p.idx1 >= n || p.idx2 >= n)
      fail(ErrorKind::IndexError, "pair (" + std::to_string(p.idx1) + ", " + std::to_string(p.idx2) +
                                      ") outside a collection of " + std::to_string(n));
}

}  // namespace

std::uint32_t collection_checksum(std::span<const Histogram> collection) {
  std::uint32_t crc = 0;
  for (const auto& h : collection) {
    const std::uint32_t dims[2] = {static_cast<std::uint32_t>(h.height()), static_cast<std::uint32_t>(h.width())};
    crc = io::crc32({reinterpret_cast<const std::uint8_t*>(dims), sizeof dims}, crc);
    crc = io::crc32({reinterpret_cast<const std::uint8_t*>(h.mass().data()), h.mass().size_bytes()}, crc);
  }
  return crc;
}

std::vector<std::uint8_t> serialize_pairs(const PairFile& file) {
  io::ByteWriter w;
  w.bytes(kPairMagic, 4);
  w.put<std::uint64_t>(file.pairs.size());
  w.put<std::uint32_t>(file.collection_checksum);
  for (const auto& p : file.pairs) {
    w.put<std::uint32_t>(p.idx1);
    w.put<std::uint32_t>(p.idx2);
    w.put<double>(p.y);
  }
  w.seal();
  return w.take();
}

PairFile parse_pairs(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) fail(ErrorKind::TruncatedFile, "pair file shorter than its magic");
  if (std::memcmp(bytes.data(), kPairMagic, 4) != 0) fail(ErrorKind::BadMagic, "not a WPR1 pair file");
  const auto body = io::verify_sealed(bytes);
  io::ByteReader r(body);
  r.take(4);
  const auto count = r.get<std::uint64_t>();
  PairFile file;
  file.collection_checksum = r.get<std::uint32_t>();
  if (count > (body.size() - kPairHeaderBytes) / kPairRecordBytes || body.size() != kPairHeaderBytes + count * kPairRecordBytes)
    fail(ErrorKind::MalformedHeader, "pair count disagrees with file size");
  file.pairs.resize(count);
  for (auto& p : file.pairs) {
    p.idx1 = r.get<std::uint32_t>();
    p.idx2 = r.get<std::uint32_t>();
    p.y = r.get<double>();
    if (!(p.y >= 0.0) || !std::isfinite(p.y)) fail(ErrorKind::MalformedHeader, "pair label is negative or non-finite");
  }
  return file;
}

void save_pairs(const PairFile& file, const std::filesystem::path& path) { io::write_file(path, serialize_pairs(file)); }

PairFile load_pairs(const std::filesystem::path& path) { return parse_pairs(io::read_file(path)); }

void check_pairs(const PairFile& file, std::span<const Histogram> collection) {
  check_indices(file.pairs, collection.size());
  if (file.collection_checksum != collection_checksum(collection))
    fail(ErrorKind::DimensionMismatch, "pair file was generated from a different collection");
}

std::vector<PairSample> generate_pairs(std::span<const Histogram> collection, std::size_t n_pairs, std::uint64_t seed,
                                       const PairGenOptions& opts) {
  const auto draws = draw_pairs(collection.size(), n_pairs, seed, opts.allow_self_pairs);
  std::vector<PairSample> out(n_pairs);
  label_draws(collection, draws, 0, seed, opts, out);
  return out;
}

std::vector<PairSample> resume_pairs(std::span<const Histogram> collection, const ResumeToken& token,
                                     std::span<const PairSample> prefix, const PairGenOptions& opts) {
  if (prefix.size() != token.completed || token.completed > token.n_pairs)
    fail(ErrorKind::InvalidArgument, "resume prefix does not match its token");
  const auto draws = draw_pairs(collection.size(), token.n_pairs, token.seed, opts.allow_self_pairs);
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (prefix[i].idx1 != draws[i].idx1 || prefix[i].idx2 != draws[i].idx2)
      fail(ErrorKind::InvalidArgument, "resume prefix was drawn with different settings");
  std::vector<PairSample> out(token.n_pairs);
  std::copy(prefix.begin(), prefix.end(), out.begin());
  label_draws(collection, draws, token.completed, token.seed, opts, out);
  return out;
}

void SplitSpec::validate() const {
  for (double f : {train_fraction, val_fraction, test_fraction})
    if (!(f > 0.0 && f < 1.0)) fail(ErrorKind::InvalidArgument, "split fractions must lie in (0, 1)");
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9)
    fail(ErrorKind::InvalidArgument, "split fractions must sum to 1");
}

SplitResult split(std::span<const PairSample> pairs, const SplitSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t n = pairs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = static_cast<std::size_t>(std::llround(spec.val_fraction * static_cast<double>(n)));
  const auto n_test =
      std::min(n - n_val, static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(n))));
  SplitResult out;
  for (std::size_t k = 0; k < n; ++k) {
    auto& dst = k < n_val ? out.val : (k < n_val + n_test ? out.test : out.train);
    dst.push_back(pairs[order[k]]);
  }
  if (out.val.empty()) out.warnings.push_back("validation split is empty");
  if (out.test.empty()) out.warnings.push_back("test split is empty");
  if (out.train.empty()) out.warnings.push_back("training split is empty");
  return out;
}

void TrainConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(ErrorKind::InvalidArgument, "lambda must be finite and >= 0");
  if (!(sparsity_weight >= 0.0) || !std::isfinite(sparsity_weight))
    fail(ErrorKind::InvalidArgument, "sparsity_weight must be finite and >= 0");
  if (batch_size == 0 || max_epochs == 0 || patience == 0)
    fail(ErrorKind::InvalidArgument, "batch_size, max_epochs, and patience must be positive");
  if (!(adam.lr > 0.0) || !(adam.eps > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
      !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    fail(ErrorKind::InvalidArgument, "Adam needs lr > 0, eps > 0, and betas in [0, 1)");
  if (!(time_budget_seconds >= 0.0)) fail(ErrorKind::InvalidArgument, "time budget must be >= 0");
}

std::string TrainingReport::to_tsv() const {
  std::string out = "# epoch\ttrain_dist\ttrain_kl\ttrain_sparse\tval_total\n";
  char line[256];
  for (const auto& e : epochs) {
    std::snprintf(line, sizeof line, "%zu\t%.10g\t%.10g\t%.10g\t%.10g\n", e.epoch, e.train.distance, e.train.kl,
                  e.train.sparsity, e.val.total);
    out += line;
  }
  return out;
}

LossTerms pair_losses(const NetworkParams& params, std::span<const PairSample> pairs,
                      std::span<const Histogram> collection, const TrainConfig& cfg) {
  check_indices(pairs, collection.size());
  LossTerms sum;
  if (pairs.empty()) return sum;
  struct Cached {
    EmbeddingVec e;
    double kl = 0.0, sparsity = 0.0;
  };
  std::vector<std::optional<Cached>> cache(collection.size());
  auto get = [&](std::size_t i) -> const Cached& {
    if (!cache[i]) {
      Cached c{embed(params, collection[i])};
      if (cfg.lambda > 0.0) {
        const Histogram r = decode(params, c.e);
        c.kl = kl_divergence(collection[i].mass(), r.mass());
        c.sparsity = sparsity_penalty(r.mass());
      }
      cache[i] = std::move(c);
    }
    return *cache[i];
  };
  for (const auto& p : pairs) {
    const Cached& a = get(p.idx1);
    const Cached& b = get(p.idx2);
    const double d = squared_distance(a.e, b.e) - p.y;
    sum.distance += d * d;
    sum.kl += a.kl + b.kl;
    sum.sparsity += a.sparsity + b.sparsity;
  }
  const auto n = static_cast<double>(pairs.size());
  LossTerms mean{sum.distance / n, sum.kl / n, sum.sparsity / n, 0.0};
  finish_total(mean, cfg);
  return mean;
}

TrainResult train(const NetworkParams& init, std::span<const PairSample> train_pairs,
                  std::span<const PairSample> val_pairs, std::span<const Histogram> collection,
                  const TrainConfig& cfg, const std::function<void(const EpochRecord&)>& on_epoch) {
  cfg.validate();
  if (train_pairs.empty()) fail(ErrorKind::InvalidArgument, "training set is empty");
  check_indices(train_pairs, collection.size());
  check_indices(val_pairs, collection.size());
  const auto& spec = init.spec;
  for (const auto& p : train_pairs)
    for (std::uint32_t i : {p.idx1, p.idx2})
      if (collection[i].height() != spec.image_height || collection[i].width() != spec.image_width)
        fail(ErrorKind::ShapeMismatch, "collection images do not match the architecture");

  const auto t_start = Clock::now();
  TrainResult result{init, {}};
  NetworkParams params = init;
  NetworkParams grads = params.zeros_like();
  AdamState adam;
  const bool with_decoder = cfg.lambda > 0.0;
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::vector<std::size_t> order(train_pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t_epoch = Clock::now();
    std::seed_seq seq{static_cast<std::uint64_t>(cfg.seed), static_cast<std::uint64_t>(epoch)};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);

    LossTerms sum;
    std::size_t batch_index = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg.batch_size, ++batch_index) {
      const std::size_t b1 = std::min(order.size(), b0 + cfg.batch_size);
      const double inv = 1.0 / static_cast<double>(b1 - b0);
      for (Tensor* t : grads.tensors()) t->fill(0.0);
      for (std::size_t k = b0; k < b1; ++k) {
        const PairSample& p = train_pairs[order[k]];
        Graph g;
        const BoundParams bp = bind_params(g, params, grads);
        const Var x1 = g.input(image_tensor(collection[p.idx1]));
        const Var x2 = g.input(image_tensor(collection[p.idx2]));
        const Var e1 = encode(g, bp, spec, x1);
        const Var e2 = encode(g, bp, spec, x2);
        std::vector<Var> terms{loss_distance(g, e1, e2, p.y)};
        std::vector<double> weights{inv};
        const double dist = g.value(terms[0])[0];
        require_finite(dist, epoch, batch_index, "distance");
        sum.distance += dist;
        if (with_decoder) {
          const Var r1 = decode(g, bp, spec, e1);
          const Var r2 = decode(g, bp, spec, e2);
          const Var kl1 = loss_kl(g, x1, r1), kl2 = loss_kl(g, x2, r2);
          const Var s1 = loss_sparsity(g, r1), s2 = loss_sparsity(g, r2);
          const double kl = g.value(kl1)[0] + g.value(kl2)[0];
          const double sp = g.value(s1)[0] + g.value(s2)[0];
          require_finite(kl, epoch, batch_index, "kl");
          require_finite(sp, epoch, batch_index, "sparsity");
          sum.kl += kl;
          sum.sparsity += sp;
          terms.insert(terms.end(), {kl1, kl2, s1, s2});
          const double wk = cfg.lambda * inv, ws = cfg.sparsity_weight * inv;
          weights.insert(weights.end(), {wk, wk, ws, ws});
        }
        g.backward(weighted_sum(g, terms, weights));
      }
      adam_step(params.tensors(), std::as_const(grads).tensors(), adam, cfg.adam);
      if (!params.all_finite())
        fail(ErrorKind::NonFiniteLoss, "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_index) +
                                           ": parameters became non-finite after the update");
    }

    EpochRecord rec;
    rec.epoch = epoch;
    const auto n = static_cast<double>(train_pairs.size());
    rec.train = LossTerms{sum.distance / n, sum.kl / n, sum.sparsity / n, 0.0};
    finish_total(rec.train, cfg);
    rec.val = val_pairs.empty() ? rec.train : pair_losses(params, val_pairs, collection, cfg);
    require_finite(rec.val.total, epoch, batch_index, "validation total");
    rec.seconds = seconds_since(t_epoch);
    result.report.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (rec.val.total < best) {
      best = rec.val.total;
      result.params = params;
      result.report.best_epoch = epoch;
      result.report.best_val_total = best;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      result.report.stop_reason = "no validation improvement for " + std::to_string(cfg.patience) + " epochs";
      break;
    }
    if (cfg.time_budget_seconds > 0.0 && seconds_since(t_start) >= cfg.time_budget_seconds) {
      result.report.stop_reason = "time budget reached";
      break;
    }
  }
  if (result.report.stop_reason.empty()) result.report.stop_reason = "reached max_epochs";
  if (val_pairs.empty()) result.report.stop_reason += " (no validation pairs; selected on training loss)";
  return result;
}

Metrics compute_metrics(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) fail(ErrorKind::DimensionMismatch, "prediction and label counts differ");
  if (predicted.empty()) fail(ErrorKind::EmptyTestSet, "no pairs to evaluate");
  const auto n = static_cast<double>(predicted.size());
  Metrics m;
  m.count = predicted.size();
  double sq = 0.0, y2 = 0.0, mp = 0.0, my = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - actual[i];
    sq += d * d;
    y2 += actual[i] * actual[i];
    mp += predicted[i];
    my += actual[i];
  }
  m.mse = sq / n;
  m.relative_mse = y2 > 0.0 ? m.mse / (y2 / n) : (m.mse == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  mp /= n;
  my /= n;
  double cov = 0.0, vp = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double a = predicted[i] - mp, b = actual[i] - my;
    cov += a * b;
    vp += a * a;
    vy += b * b;
  }
  if (vp > 0.0 && vy > 0.0) {
    m.correlation = std::clamp(cov / std::sqrt(vp * vy), -1.0, 1.0);
  } else {
    m.correlation = 0.0;
    m.correlation_defined = false;
  }
  return m;
}

Metrics evaluate(const NetworkParams& params, std::span<const PairSample> pairs, std::span<const Histogram> collection) {
  if (pairs.empty()) fail(ErrorKind::EmptyTestSet, "no pairs to evaluate");
  check_indices(pairs, collection.size());
  std::vector<std::optional<EmbeddingVec>> cache(collection.size());
  auto get = [&](std::size_t i) -> const EmbeddingVec& {
    if (!cache[i]) cache[i] = embed(params, collection[i]);
    return *cache[i];
  };
  std::vector<double> predicted, actual;
  predicted.reserve(pairs.size());
  actual.reserve(pairs.size());
  for (const auto& p : pairs) {
    predicted.push_back(squared_distance(get(p.idx1), get(p.idx2)));
    actual.push_back(p.y);
  }
  return compute_metrics(predicted, actual);
}

std::string_view to_string(BenchMode m) {
  switch (m) {
    case BenchMode::Indep: return "indep";
    case BenchMode::Pairwise: return "pairwise";
    case BenchMode::ExactLp: return "lp";
  }
  return "unknown";
}

BenchResult bench_throughput(const NetworkParams& params, std::span<const PairSample> pairs,
                             std::span<const Histogram> collection, BenchMode mode, const BenchOptions& opts) {
  if (pairs.empty()) fail(ErrorKind::EmptyTestSet, "no pairs to benchmark");
  if (opts.max_pairs > 0 && pairs.size() > opts.max_pairs) pairs = pairs.first(opts.max_pairs);
  check_indices(pairs, collection.size());
  const std::size_t p = params.spec.embed_dim;
  const FloatEncoder fenc(params);
  auto embed_into = [&](const Histogram& h, std::span<double> out) {
    if (opts.single_precision) {
      thread_local std::vector<float> f;
      f.resize(p);
      fenc.embed(h, f);
      std::copy(f.begin(), f.end(), out.begin());
    } else {
      const EmbeddingVec e = embed(params, h);
      std::copy(e.values.begin(), e.values.end(), out.begin());
    }
  };
  auto sqdist = [p](const double* a, const double* b) {
    double s = 0.0;
    for (std::size_t k = 0; k < p; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return s;
  };

  BenchResult r;
  r.mode = mode;
  const auto t0 = Clock::now();
  switch (mode) {
    case BenchMode::Indep: {
      std::vector<double> a(p), b(p);
      for (const auto& q : pairs) {
        embed_into(collection[q.idx1], a);
        embed_into(collection[q.idx2], b);
        r.checksum += sqdist(a.data(), b.data());
      }
      r.distances = pairs.size();
      break;
    }
    case BenchMode::Pairwise: {
      std::vector<std::uint32_t> left, right;
      for (const auto& q : pairs) {
        left.push_back(q.idx1);
        right.push_back(q.idx2);
      }
      for (auto* v : {&left, &right}) {
        std::sort(v->begin(), v->end());
        v->erase(std::unique(v->begin(), v->end()), v->end());
      }
      std::vector<double> el(left.size() * p), er(right.size() * p);
      for (std::size_t i = 0; i < left.size(); ++i) embed_into(collection[left[i]], {el.data() + i * p, p});
      for (std::size_t j = 0; j < right.size(); ++j) embed_into(collection[right[j]], {er.data() + j * p, p});
      for (std::size_t i = 0; i < left.size(); ++i)
        for (std::size_t j = 0; j < right.size(); ++j) r.checksum += sqdist(el.data() + i * p, er.data() + j * p);
      r.distances = left.size() * right.size();
      break;
    }
    case BenchMode::ExactLp:
      for (const auto& q : pairs) r.checksum += w2_exact(collection[q.idx1], collection[q.idx2]).objective;
      r.distances = pairs.size();
      break;
  }
  r.seconds = seconds_since(t0);
  r.rate = static_cast<double>(r.distances) / std::max(r.seconds, 1e-9);
  return r;
}

}  // namespace dwe
