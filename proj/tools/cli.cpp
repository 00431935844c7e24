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

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>
#include <string>

#include "dwe/analytics.hpp"
#include "dwe/binary_io.hpp"
#include "dwe/config.hpp"
#include "dwe/dataset_io.hpp"
#include "dwe/entropic_ot.hpp"
#include "dwe/exact_ot.hpp"
#include "dwe/model.hpp"
#include "dwe/synthetic.hpp"
#include "dwe/training.hpp"

namespace dwe::cli {
namespace {

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Dataset open_dataset(const std::string& path, std::ostream& err) {
  Dataset ds = load_dataset(path);
  for (const auto& w : ds.warnings) err << "warning: " << path << ": " << w << "\n";
  if (ds.images.empty()) fail(ErrorKind::AllZeroInput, path + " holds no usable images");
  return ds;
}

std::size_t checked_index(long long i, const Dataset& ds, const char* what) {
  if (i < 0 || static_cast<std::size_t>(i) >= ds.images.size())
    fail(ErrorKind::IndexError, std::string(what) + " index " + std::to_string(i) + " outside [0, " +
                                    std::to_string(ds.images.size()) + ")");
  return static_cast<std::size_t>(i);
}

void print_metrics(std::ostream& out, const Metrics& m) {
  out << format("pairs: %zu\nmse: %.10g\nrelative_mse: %.10g\ncorrelation: %.10g%s\n", m.count, m.mse, m.relative_mse,
                m.correlation, m.correlation_defined ? "" : " (undefined: constant predictor or labels)");
}

PairFile open_pairs(const std::string& path, const Dataset& ds) {
  PairFile pf = load_pairs(path);
  check_pairs(pf, ds.images);
  return pf;
}

// Options shared by subcommands, bound before parsing.
struct Options {
  std::string dataset, labels, pairs, out, config, checkpoint, report, test_out, mode = "indep", format = "idx";
  std::uint64_t seed = 0;
  std::size_t n = 0, workers = 1, steps = 9, k = 5, component = 0, count = 5000, size = 28, max_pairs = 0, cols = 0;
  std::size_t capacity = kDefaultCapacity, embed_dim = 50;
  long long a = 0, b = 0, klass = -1;
  std::vector<long long> indices;
  std::vector<double> weights, t_values{-2, -1, 0, 1, 2};
  bool self_pairs = false, double_precision = false;
  TrainConfig train;
  SplitSpec split;
  SinkhornConfig sinkhorn;
};

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::WeightError:
      return kExitUsage;
    case ErrorKind::NumericalUnderflow:
    case ErrorKind::NonFiniteActivation:
    case ErrorKind::NonFiniteLoss:
    case ErrorKind::WorkerFailure:
      return kExitNumerical;
    default:
      return kExitData;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learned Wasserstein embeddings: exact labels, siamese training, and embedding analytics", "dwe"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");
  Options o;
  std::function<void()> action;

  auto dataset_opt = [&](CLI::App* s) {
    s->add_option("--dataset", o.dataset, "Image file (IDX u8 images or NPY u8 bitmaps)")->required();
  };
  auto checkpoint_opt = [&](CLI::App* s) {
    s->add_option("--checkpoint", o.checkpoint, "Model checkpoint (DWE1)")->required();
  };
  auto pairs_opt = [&](CLI::App* s) { s->add_option("--pairs", o.pairs, "Pair file (WPR1)")->required(); };

  // synth
  {
    auto* s = app.add_subcommand("synth", "Write a labelled synthetic image set (blobs, rings, strokes, crosses)");
    s->add_option("--out", o.out, "Image file to write")->required();
    s->add_option("--labels", o.labels, "IDX label file to write");
    s->add_option("--count", o.count, "Number of images")->capture_default_str();
    s->add_option("--size", o.size, "Image height and width")->capture_default_str();
    s->add_option("--format", o.format, "idx or npy")->check(CLI::IsMember({"idx", "npy"}))->capture_default_str();
    s->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    s->callback([&] {
      action = [&] {
        const ImageSet set = make_synthetic(SyntheticConfig{o.count, o.size, o.size, o.seed});
        io::write_file(o.out, o.format == "idx" ? encode_idx_images(set) : encode_npy(set));
        if (!o.labels.empty()) io::write_file(o.labels, encode_idx_labels(set.labels));
        out << format("wrote %zu images of %zux%zu to %s\n", set.count(), set.height, set.width, o.out.c_str());
      };
    });
  }

  // gen-pairs
  {
    auto* s = app.add_subcommand("gen-pairs", "Draw index pairs and label them with exact W2^2");
    dataset_opt(s);
    s->add_option("--n", o.n, "Number of pairs")->required();
    s->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    s->add_option("--workers", o.workers, "Parallel solver workers")->capture_default_str();
    s->add_option("--out", o.out, "Pair file to write")->required();
    s->add_option("--capacity", o.capacity, "Maximum support size per histogram")->capture_default_str();
    s->add_flag("--self-pairs", o.self_pairs, "Allow (i, i) pairs");
    s->callback([&] {
      action = [&] {
        const Dataset ds = open_dataset(o.dataset, err);
        PairGenOptions opts;
        opts.workers = o.workers;
        opts.allow_self_pairs = o.self_pairs;
        opts.solver.capacity = o.capacity;
        const auto t0 = std::chrono::steady_clock::now();
        PairFile pf{collection_checksum(ds.images), generate_pairs(ds.images, o.n, o.seed, opts)};
        save_pairs(pf, o.out);
        out << format("wrote %zu pairs to %s in %.1f s\n", pf.pairs.size(), o.out.c_str(), seconds_since(t0));
      };
    });
  }

  // train
  {
    auto* s = app.add_subcommand("train", "Split a pair file and train the embedding and decoder");
    pairs_opt(s);
    dataset_opt(s);
    s->add_option("--config", o.config, "key=value file; flags below override it");
    s->add_option("--out", o.out, "Checkpoint to write")->required();
    s->add_option("--report", o.report, "Per-epoch TSV report to write");
    s->add_option("--test-out", o.test_out, "Write the held-out test pairs here");
    s->add_option("--embed-dim", o.embed_dim, "Embedding dimension")->capture_default_str();
    s->add_option("--seed", o.train.seed, "Seed for the split, initialization, and shuffling");
    s->add_option("--lambda", o.train.lambda, "Reconstruction weight");
    s->add_option("--sparsity-weight", o.train.sparsity_weight, "Weight of the square-root sparsity penalty");
    s->add_option("--batch-size", o.train.batch_size, "Pairs per update");
    s->add_option("--max-epochs", o.train.max_epochs, "Epoch limit");
    s->add_option("--patience", o.train.patience, "Epochs without validation improvement before stopping");
    s->add_option("--learning-rate", o.train.adam.lr, "Adam step size");
    s->add_option("--time-budget", o.train.time_budget_seconds, "Stop after the epoch exceeding this many seconds");
    s->add_option("--train-fraction", o.split.train_fraction, "Training share of the pairs");
    s->add_option("--val-fraction", o.split.val_fraction, "Validation share of the pairs");
    s->add_option("--test-fraction", o.split.test_fraction, "Test share of the pairs");
    s->callback([&, s] {
      action = [&, s] {
        // The file supplies defaults; flags given on the command line win.
        TrainConfig cfg;
        SplitSpec fractions;
        SinkhornConfig sk;
        if (!o.config.empty()) apply_config(load_config(o.config), cfg, fractions, sk);
        auto given = [&](const char* name) { return s->get_option(name)->count() > 0; };
        if (given("--seed")) cfg.seed = o.train.seed;
        if (given("--lambda")) cfg.lambda = o.train.lambda;
        if (given("--sparsity-weight")) cfg.sparsity_weight = o.train.sparsity_weight;
        if (given("--batch-size")) cfg.batch_size = o.train.batch_size;
        if (given("--max-epochs")) cfg.max_epochs = o.train.max_epochs;
        if (given("--patience")) cfg.patience = o.train.patience;
        if (given("--learning-rate")) cfg.adam.lr = o.train.adam.lr;
        if (given("--time-budget")) cfg.time_budget_seconds = o.train.time_budget_seconds;
        if (given("--train-fraction")) fractions.train_fraction = o.split.train_fraction;
        if (given("--val-fraction")) fractions.val_fraction = o.split.val_fraction;
        if (given("--test-fraction")) fractions.test_fraction = o.split.test_fraction;
        cfg.validate();

        const Dataset ds = open_dataset(o.dataset, err);
        const PairFile pf = open_pairs(o.pairs, ds);
        SplitResult parts = split(pf.pairs, fractions, cfg.seed);
        for (const auto& w : parts.warnings) err << "warning: " << w << "\n";
        if (!o.test_out.empty()) save_pairs(PairFile{pf.collection_checksum, parts.test}, o.test_out);

        ArchitectureSpec spec;
        spec.image_height = ds.manifest.height;
        spec.image_width = ds.manifest.width;
        spec.embed_dim = o.embed_dim;
        spec.validate();
        out << format("train %zu, val %zu, test %zu pairs\n", parts.train.size(), parts.val.size(), parts.test.size());
        const TrainResult r = train(init_params(spec, cfg.seed), parts.train, parts.val, ds.images, cfg,
                                    [&](const EpochRecord& e) {
                                      out << format("epoch %zu: train %.6g (dist %.6g kl %.6g sparse %.6g), val %.6g, %.1f s\n",
                                                    e.epoch, e.train.total, e.train.distance, e.train.kl,
                                                    e.train.sparsity, e.val.total, e.seconds);
                                      out.flush();
                                    });
        save_checkpoint(r.params, o.out);
        if (!o.report.empty()) {
          const std::string tsv = r.report.to_tsv();
          io::write_file(o.report, {reinterpret_cast<const std::uint8_t*>(tsv.data()), tsv.size()});
        }
        out << format("best epoch %zu (val %.6g); %s\n", r.report.best_epoch, r.report.best_val_total,
                      r.report.stop_reason.c_str());
        if (!parts.test.empty()) print_metrics(out, evaluate(r.params, parts.test, ds.images));
      };
    });
  }

  // eval / cross-eval
  for (const char* name : {"eval", "cross-eval"}) {
    const bool cross = std::string(name) == "cross-eval";
    auto* s = app.add_subcommand(name, cross ? "Evaluate a model on pairs from another dataset"
                                             : "Compare predicted and exact W2^2 on a pair file");
    checkpoint_opt(s);
    pairs_opt(s);
    dataset_opt(s);
    s->callback([&, cross] {
      action = [&, cross] {
        const NetworkParams params = load_checkpoint(o.checkpoint);
        const Dataset ds = open_dataset(o.dataset, err);
        const PairFile pf = open_pairs(o.pairs, ds);
        print_metrics(out, cross ? cross_evaluate(params, pf.pairs, ds.images) : evaluate(params, pf.pairs, ds.images));
      };
    });
  }

  // bench
  {
    auto* s = app.add_subcommand("bench", "Distances per second for the embedding or the exact solver");
    checkpoint_opt(s);
    pairs_opt(s);
    dataset_opt(s);
    s->add_option("--mode", o.mode, "indep, pairwise, or lp")
        ->check(CLI::IsMember({"indep", "pairwise", "lp"}))
        ->capture_default_str();
    s->add_option("--max-pairs", o.max_pairs, "Use at most this many pairs (0 = all)")->capture_default_str();
    s->add_flag("--double", o.double_precision, "Embed in 64-bit instead of 32-bit floats");
    s->callback([&] {
      action = [&] {
        const NetworkParams params = load_checkpoint(o.checkpoint);
        const Dataset ds = open_dataset(o.dataset, err);
        const PairFile pf = open_pairs(o.pairs, ds);
        const BenchMode mode =
            o.mode == "indep" ? BenchMode::Indep : (o.mode == "pairwise" ? BenchMode::Pairwise : BenchMode::ExactLp);
        const BenchResult r =
            bench_throughput(params, pf.pairs, ds.images, mode, BenchOptions{!o.double_precision, o.max_pairs});
        out << format("mode: %s\ndistances: %zu\nseconds: %.6g\nrate: %.6g per second\n",
                      std::string(to_string(r.mode)).c_str(), r.distances, r.seconds, r.rate);
      };
    });
  }

  // barycenter
  {
    auto* s = app.add_subcommand("barycenter", "Decode the weighted mean embedding of selected images");
    checkpoint_opt(s);
    dataset_opt(s);
    auto* idx = s->add_option("--indices", o.indices, "Image indices")->delimiter(',');
    auto* cls = s->add_option("--class", o.klass, "Use every image with this label");
    idx->excludes(cls);
    s->add_option("--labels", o.labels, "IDX label file for --class");
    s->add_option("--weights", o.weights, "Weights, one per image (default uniform)")->delimiter(',');
    s->add_option("--out", o.out, "PGM file: barycenter next to the pixelwise mean")->required();
    s->callback([&] {
      action = [&] {
        const NetworkParams params = load_checkpoint(o.checkpoint);
        const Dataset ds = open_dataset(o.dataset, err);
        std::vector<Histogram> chosen;
        if (o.klass >= 0) {
          if (o.labels.empty()) fail(ErrorKind::InvalidArgument, "--class needs --labels");
          const auto labels = kept_labels(ds, parse_idx_labels(o.labels));
          for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == o.klass) chosen.push_back(ds.images[i]);
        } else {
          for (long long i : o.indices) chosen.push_back(ds.images[checked_index(i, ds, "image")]);
        }
        if (chosen.empty()) fail(ErrorKind::InvalidArgument, "no images selected");
        const BarycenterWeights w =
            o.weights.empty() ? BarycenterWeights::uniform(chosen.size()) : BarycenterWeights{o.weights};
        const Histogram bary = barycenter(params, chosen, w);
        std::vector<double> mean(bary.size(), 0.0);
        for (std::size_t i = 0; i < chosen.size(); ++i)
          for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += w.alphas[i] * chosen[i][j];
        const Histogram euclid = normalize(mean, bary.height(), bary.width());
        const std::vector<Histogram> tiles{bary, euclid};
        emit_image_grid(tiles, 2, o.out);
        out << format("images: %zu\nbarycenter sqrt-score: %.6g\npixel mean sqrt-score: %.6g\n", chosen.size(),
                      half_norm_score(bary.mass()), half_norm_score(euclid.mass()));
      };
    });
  }

  // interpolate
  {
    auto* s = app.add_subcommand("interpolate", "Decode a straight path between two embeddings");
    checkpoint_opt(s);
    dataset_opt(s);
    s->add_option("--a", o.a, "First image index")->required();
    s->add_option("--b", o.b, "Second image index")->required();
    s->add_option("--steps", o.steps, "Frames including both ends")->capture_default_str();
    s->add_option("--out", o.out, "PGM file")->required();
    s->callback([&] {
      action = [&] {
        const NetworkParams params = load_checkpoint(o.checkpoint);
        const Dataset ds = open_dataset(o.dataset, err);
        const auto frames = interpolate(params, ds.images[checked_index(o.a, ds, "--a")],
                                        ds.images[checked_index(o.b, ds, "--b")], o.steps);
        emit_image_grid(frames, frames.size(), o.out);
        out << format("wrote %zu frames to %s\n", frames.size(), o.out.c_str());
      };
    });
  }

  // pga
  {
    auto* s = app.add_subcommand("pga", "Principal directions of the embedded dataset and a walk along one");
    checkpoint_opt(s);
    dataset_opt(s);
    s->add_option("--k", o.k, "Number of directions")->capture_default_str();
    s->add_option("--component", o.component, "Direction to walk along (0-based)")->capture_default_str();
    s->add_option("--t", o.t_values, "Steps in standard deviations")->delimiter(',');
    s->add_option("--max-samples", o.max_pairs, "Use the first N images (0 = all)")->capture_default_str();
    s->add_option("--out", o.out, "PGM file")->required();
    s->callback([&] {
      action = [&] {
        const NetworkParams params = load_checkpoint(o.checkpoint);
        const Dataset ds = open_dataset(o.dataset, err);
        std::span<const Histogram> sample = ds.images;
        if (o.max_pairs > 0 && sample.size() > o.max_pairs) sample = sample.first(o.max_pairs);
        const PrincipalDirections pd = pga(params, sample, o.k);
        const auto frames = pga_walk(params, pd, o.component, o.t_values);
        emit_image_grid(frames, frames.size(), o.out);
        for (std::size_t c = 0; c < pd.variances.size(); ++c)
          out << format("variance %zu: %.10g\n", c, pd.variances[c]);
      };
    });
  }

  // exact
  {
    auto* s = app.add_subcommand("exact", "Exact W2^2 between two images with its optimality certificate");
    dataset_opt(s);
    s->add_option("--a", o.a, "First image index")->required();
    s->add_option("--b", o.b, "Second image index")->required();
    s->add_option("--capacity", o.capacity, "Maximum support size per histogram")->capture_default_str();
    s->callback([&] {
      action = [&] {
        const Dataset ds = open_dataset(o.dataset, err);
        const Histogram& a = ds.images[checked_index(o.a, ds, "--a")];
        const Histogram& b = ds.images[checked_index(o.b, ds, "--b")];
        SolverOptions so;
        so.capacity = o.capacity;
        const ExactResult r = w2_exact(a, b, so);
        const OptimalityReport rep = verify_optimality(r.plan, r.certificate, GroundCost(a.height(), a.width()));
        out << format("w2_squared: %.12g\ncertificate: %s\n", r.objective, rep.ok ? "OK" : "FAILED");
        if (!rep.ok) fail(ErrorKind::WorkerFailure, "certificate rejected: " + rep.diagnostic);
      };
    });
  }

  // sinkhorn
  {
    auto* s = app.add_subcommand("sinkhorn", "Entropic transport cost between two images");
    dataset_opt(s);
    s->add_option("--a", o.a, "First image index")->required();
    s->add_option("--b", o.b, "Second image index")->required();
    s->add_option("--config", o.config, "key=value file with sinkhorn_* keys");
    s->add_option("--epsilon", o.sinkhorn.epsilon, "Regularization in pixel^2 (default 0.05 x median cost)");
    s->add_option("--max-iters", o.sinkhorn.max_iters, "Iteration cap");
    s->add_option("--tolerance", o.sinkhorn.tolerance, "L1 marginal violation target");
    s->callback([&, s] {
      action = [&, s] {
        const Dataset ds = open_dataset(o.dataset, err);
        SinkhornConfig cfg = default_sinkhorn_config(ds.manifest.height, ds.manifest.width);
        TrainConfig t;
        SplitSpec sp;
        if (!o.config.empty()) apply_config(load_config(o.config), t, sp, cfg);
        if (s->get_option("--epsilon")->count()) cfg.epsilon = o.sinkhorn.epsilon;
        if (s->get_option("--max-iters")->count()) cfg.max_iters = o.sinkhorn.max_iters;
        if (s->get_option("--tolerance")->count()) cfg.tolerance = o.sinkhorn.tolerance;
        const SinkhornResult r = sinkhorn_w2(ds.images[checked_index(o.a, ds, "--a")],
                                             ds.images[checked_index(o.b, ds, "--b")], cfg);
        out << format("epsilon: %.6g\nobjective: %.12g\niterations: %zu\nconverged: %s\n", cfg.epsilon, r.objective,
                      r.iterations, r.converged ? "yes" : "no");
      };
    });
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    if (action) action();
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace dwe::cli
