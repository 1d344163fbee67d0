#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kmp/data.hpp"
#include "kmp/error.hpp"
#include "kmp/eval.hpp"
#include "kmp/model.hpp"
#include "kmp/optimizer.hpp"
#include "kmp/simd.hpp"

namespace kmp::cli {
namespace {

namespace fs = std::filesystem;

struct HyperFlags {
  FitConfig config;
  std::vector<double> sigmas;  // 0 means "median default" for that view
};

void add_hyper_flags(CLI::App* cmd, HyperFlags& h) {
  cmd->add_option("--dim,-d", h.config.dim, "embedding dimension d")->capture_default_str();
  cmd->add_option("--r", h.config.r, "weight exponent r > 1")->capture_default_str();
  cmd->add_option("--clusters,-G", h.config.clusters, "GMM clusters per view")->capture_default_str();
  cmd->add_option("--atoms,--epsilon", h.config.max_atoms, "OMP sparsity budget")->capture_default_str();
  cmd->add_option("--sigma", h.sigmas, "RBF bandwidth per view (0 = median distance)");
  cmd->add_option("--sigma-scale", h.config.sigma_scale, "multiplier on median-distance bandwidths")
      ->capture_default_str();
  cmd->add_option("--ridge", h.config.ridge, "relative ridge on K D K")->capture_default_str();
  cmd->add_option("--tol", h.config.tol, "relative F1 change that stops alternation")->capture_default_str();
  cmd->add_option("--max-iters", h.config.max_iters, "alternation iteration cap")->capture_default_str();
  cmd->add_option("--seed", h.config.seed, "random seed")->capture_default_str();
}

FitConfig resolve(const HyperFlags& h, std::size_t views) {
  FitConfig c = h.config;
  if (!h.sigmas.empty()) {
    if (h.sigmas.size() != views) {
      throw ArgumentError("--sigma needs one value per view (" + std::to_string(views) + ")");
    }
    for (double s : h.sigmas) c.sigmas.push_back(s > 0.0 ? std::optional<double>(s) : std::nullopt);
  }
  c.validate();
  return c;
}

std::vector<fs::path> to_paths(const std::vector<std::string>& in) { return {in.begin(), in.end()}; }

std::vector<std::string> require_labels(const fs::path& path, Index expected, const char* what) {
  auto labels = read_labels(path);
  if (static_cast<Index>(labels.size()) != expected) {
    throw DimensionError(std::string(what) + " file " + path.string() + " has " + std::to_string(labels.size()) +
                         " labels, expected " + std::to_string(expected));
  }
  return labels;
}

void write_or_print(const std::string& path, std::ostream& out, const std::vector<MethodResult>& rows) {
  if (path.empty()) {
    write_report(out, rows);
    return;
  }
  std::ofstream file(path);
  if (!file) throw IoError("cannot write " + path);
  write_report(file, rows);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kernelized multiview projection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "kmp 1.0");

  // train
  HyperFlags train_flags;
  std::vector<std::string> train_views;
  std::string train_out;
  std::string train_log;
  auto* train = app.add_subcommand("train", "fit a projection and save the model");
  train->add_option("--views", train_views, "per-view feature files")->required();
  train->add_option("--out", train_out, "model file to write")->required();
  train->add_option("--log", train_log, "write iter,F1,F3,alpha_1..alpha_M per iteration");
  add_hyper_flags(train, train_flags);

  // embed
  std::string embed_model;
  std::vector<std::string> embed_views;
  std::string embed_out;
  auto* embed = app.add_subcommand("embed", "embed samples with a trained model");
  embed->add_option("--model", embed_model, "model file")->required();
  embed->add_option("--views", embed_views, "per-view feature files of the samples")->required();
  embed->add_option("--out", embed_out, "embedding output (CSV)")->required();

  // eval
  std::string eval_model;
  std::string eval_train_labels;
  std::vector<std::string> eval_test_views;
  std::string eval_test_labels;
  std::string eval_report;
  std::string eval_plot;
  int eval_k = 1;
  auto* eval = app.add_subcommand("eval", "k-NN accuracy of a model on labelled test samples");
  eval->add_option("--model", eval_model, "model file")->required();
  eval->add_option("--train-labels", eval_train_labels, "labels of the training samples")->required();
  eval->add_option("--test-views", eval_test_views, "per-view test feature files")->required();
  eval->add_option("--test-labels", eval_test_labels, "test labels")->required();
  eval->add_option("--k", eval_k, "neighbours")->capture_default_str();
  eval->add_option("--report", eval_report, "report file (default: stdout)");
  eval->add_option("--plot-coords", eval_plot, "write first two test embedding dimensions with labels");

  // compare
  HyperFlags compare_flags;
  std::vector<std::string> compare_views;
  std::string compare_labels;
  std::vector<std::string> compare_test_views;
  std::string compare_test_labels;
  double compare_fraction = 0.5;
  int compare_k = 1;
  std::string compare_report;
  auto* compare = app.add_subcommand("compare", "KMP vs AM/GM fusion vs single views");
  compare->add_option("--views", compare_views, "per-view feature files")->required();
  compare->add_option("--labels", compare_labels, "labels")->required();
  compare->add_option("--test-views", compare_test_views, "separate test views (otherwise a seeded split)");
  compare->add_option("--test-labels", compare_test_labels, "labels for --test-views");
  compare->add_option("--train-fraction", compare_fraction, "training share when splitting")->capture_default_str();
  compare->add_option("--k", compare_k, "neighbours")->capture_default_str();
  compare->add_option("--report", compare_report, "report file (default: stdout)");
  add_hyper_flags(compare, compare_flags);

  // synth
  SyntheticOptions synth_options;
  std::string synth_prefix;
  auto* synth = app.add_subcommand("synth", "write a synthetic labelled multiview dataset");
  synth->add_option("--classes", synth_options.classes)->capture_default_str();
  synth->add_option("--per-class", synth_options.per_class)->capture_default_str();
  synth->add_option("--dims", synth_options.view_dims, "dimension of every view")->capture_default_str();
  synth->add_option("--noise", synth_options.noise)->capture_default_str();
  synth->add_option("--noise-scales", synth_options.noise_scales, "per-view noise multipliers");
  synth->add_option("--seed", synth_options.seed)->capture_default_str();
  synth->add_option("--out-prefix", synth_prefix, "writes PREFIX_view{i}.csv and PREFIX_labels.txt")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*train) {
      const FitConfig config = resolve(train_flags, train_views.size());
      const MultiviewDataset dataset = load_views(to_paths(train_views));
      const FitResult result = fit(dataset, config);
      save_model(result.model, train_out);
      if (!train_log.empty()) {
        std::ofstream log(train_log);
        if (!log) throw IoError("cannot write " + train_log);
        write_fit_log(log, result.report);
      }
      out << "trained: N=" << dataset.n_samples() << " M=" << dataset.n_views() << " d=" << config.dim
          << " iterations=" << result.report.iterations_used << " alpha=";
      for (Index i = 0; i < result.model.alpha.size(); ++i) out << (i ? "," : "") << result.model.alpha(i);
      out << '\n';
    } else if (*embed) {
      const ProjectionModel model = load_model(embed_model);
      std::vector<Matrix> queries;
      for (const auto& p : embed_views) queries.push_back(read_matrix(p));
      write_matrix(embed_out, embed_oos(model, queries));
    } else if (*eval) {
      const ProjectionModel model = load_model(eval_model);
      const auto train_labels = require_labels(eval_train_labels, model.n_train(), "training label");
      const MultiviewDataset test = load_views(to_paths(eval_test_views), fs::path(eval_test_labels));
      const Matrix train_y = embed_train(model);
      const Matrix test_y = embed_oos(model, test.views);
      const EvalResult result = knn_classify(train_y, train_labels, test_y, *test.labels, eval_k);
      write_or_print(eval_report, out, {{"kmp", static_cast<int>(model.dim()), result.accuracy, result.seconds, model.alpha}});
      if (!eval_plot.empty()) write_plot_coords(eval_plot, test_y, *test.labels);
    } else if (*compare) {
      const FitConfig config = resolve(compare_flags, compare_views.size());
      const MultiviewDataset dataset = load_views(to_paths(compare_views), fs::path(compare_labels));
      MultiviewDataset train_set;
      MultiviewDataset test_set;
      if (!compare_test_views.empty()) {
        if (compare_test_labels.empty()) throw ArgumentError("--test-views needs --test-labels");
        train_set = dataset;
        test_set = load_views(to_paths(compare_test_views), fs::path(compare_test_labels));
      } else {
        std::tie(train_set, test_set) = split(dataset, compare_fraction, config.seed);
      }
      write_or_print(compare_report, out, compare_methods(train_set, test_set, config, compare_k));
    } else if (*synth) {
      const MultiviewDataset dataset = make_synthetic(synth_options);
      save_views(dataset, synth_prefix);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace kmp::cli
