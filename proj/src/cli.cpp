#include "nrq/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "nrq/codes.hpp"
#include "nrq/dataio.hpp"
#include "nrq/error.hpp"
#include "nrq/hashcore.hpp"
#include "nrq/metrics.hpp"
#include "nrq/search.hpp"
#include "nrq/synthetic.hpp"

namespace nrq::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

FeatureMatrix read_features(const fs::path& path) {
  return load_features(path, guess_feature_format(path));
}

void emit(const fs::path& out_path, const std::string& text, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
  } else {
    write_file_atomic(out_path, text);
  }
}

PackedCodes select_codes(const PackedCodes& codes, const std::vector<std::size_t>& rows) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(rows.size() * codes.stride());
  for (std::size_t r : rows) {
    const auto span = codes.row(r);
    bytes.insert(bytes.end(), span.begin(), span.end());
  }
  return PackedCodes(rows.size(), codes.bits(), std::move(bytes));
}

LabelSet select_labels(const LabelSet& labels, const std::vector<std::size_t>& rows) {
  LabelSet out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(labels[r]);
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double orthogonality_residual(const Matrix& w) {
  return (w.transpose() * w - Matrix::Identity(w.cols(), w.cols())).norm();
}

// ---- train -----------------------------------------------------------------

struct TrainFlags {
  std::string features;
  std::string out;
  std::string manifest;
  std::string from_manifest;
  int bits = 16;
  std::string variant = "snrq";
  std::string regularizer = "so";
  double alpha = 3.0;
  double beta = 0.01;
  int iters = 70;
  std::uint64_t seed = 0;
};

json config_to_json(const TrainConfig& c) {
  return {{"variant", std::string(to_string(c.variant))},
          {"bits", c.bits},
          {"alpha", c.alpha},
          {"beta", c.beta},
          {"iterations", c.iterations},
          {"regularizer", std::string(to_string(c.regularizer))},
          {"seed", c.seed},
          {"itq_init_iterations", c.itq_init_iterations},
          {"solver",
           {{"memory_pairs", c.solver.memory_pairs},
            {"max_iterations", c.solver.max_iterations},
            {"gradient_tolerance", c.solver.gradient_tolerance},
            {"max_line_search_steps", c.solver.max_line_search_steps}}}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.variant = parse_variant(j.at("variant").get<std::string>());
  c.bits = j.at("bits").get<int>();
  c.alpha = j.at("alpha").get<double>();
  c.beta = j.at("beta").get<double>();
  c.iterations = j.at("iterations").get<int>();
  c.regularizer = parse_regularizer(j.at("regularizer").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  c.itq_init_iterations = j.at("itq_init_iterations").get<int>();
  const json& s = j.at("solver");
  c.solver.memory_pairs = s.at("memory_pairs").get<int>();
  c.solver.max_iterations = s.at("max_iterations").get<int>();
  c.solver.gradient_tolerance = s.at("gradient_tolerance").get<double>();
  c.solver.max_line_search_steps = s.at("max_line_search_steps").get<int>();
  return c;
}

int cmd_train(const TrainFlags& f, std::ostream& out, std::ostream& err) {
  TrainConfig config;
  fs::path features = f.features;
  fs::path model_path = f.out;
  if (!f.from_manifest.empty()) {
    const auto bytes = read_file(f.from_manifest);
    json m;
    try {
      m = json::parse(bytes.begin(), bytes.end());
      config = config_from_json(m.at("config"));
      features = m.at("inputs").at("features").get<std::string>();
      if (model_path.empty()) model_path = m.at("outputs").at("model").get<std::string>();
    } catch (const json::exception& e) {
      throw DataError(f.from_manifest + ": unusable manifest (" + e.what() + ")");
    }
  } else {
    require(!f.features.empty(), "train needs --features (or --from-manifest)");
    config.bits = f.bits;
    config.variant = parse_variant(f.variant);
    config.regularizer = parse_regularizer(f.regularizer);
    config.alpha = f.alpha;
    config.beta = f.beta;
    config.iterations = f.iters;
    config.seed = f.seed;
  }
  require(!model_path.empty(), "train needs --out");
  config.validate();
  const fs::path manifest_path = f.manifest.empty() ? fs::path(model_path.string() + ".manifest.json") : fs::path(f.manifest);

  const FeatureMatrix x = center(read_features(features));
  const auto start = std::chrono::steady_clock::now();
  const TrainResult result = train(x, config);
  const double seconds = seconds_since(start);

  save_model(model_path, result.model);

  json trace = json::array();
  for (const auto& r : result.trace) {
    trace.push_back({{"iteration", r.iteration}, {"J", r.objective}, {"Q", r.quantization}});
  }
  const json manifest = {
      {"config", config_to_json(config)},
      {"inputs", {{"features", fs::absolute(features).string()}}},
      {"outputs", {{"model", fs::absolute(model_path).string()}, {"manifest", fs::absolute(manifest_path).string()}}},
      {"train_seconds", {{std::string(to_string(config.variant)), seconds}}},
      {"loss_trace", trace},
      {"warnings", result.diagnostics.messages}};
  write_file_atomic(manifest_path, manifest.dump(2) + "\n");

  for (const auto& w : result.diagnostics.messages) err << "warning: " << w << "\n";
  out << "variant\t" << to_string(config.variant) << "\n"
      << "bits\t" << config.bits << "\n"
      << "seconds\t" << num(seconds) << "\n";
  if (!result.trace.empty()) {
    out << "final_J\t" << num(result.trace.back().objective) << "\n"
        << "final_Q\t" << num(result.trace.back().quantization) << "\n";
  }
  return ok;
}

// ---- encode / hist ---------------------------------------------------------

int cmd_encode(const std::string& model_path, const std::string& features, const std::string& out_path,
               std::ostream& out) {
  const HashModel model = load_model(model_path);
  const FeatureMatrix x = read_features(features);
  const BinaryCodeMatrix codes = encode(model, x);
  save_codes(out_path, pack_codes(codes));
  out << "encoded\t" << codes.rows() << "\t" << codes.bits() << "\n";
  return ok;
}

int cmd_hist(const std::string& model_path, const std::string& features, const std::string& out_path, int bins,
             std::string bins_out, std::ostream& out) {
  require(bins >= 0, "--bins must be non-negative");
  const HashModel model = load_model(model_path);
  const Matrix p = project(model, read_features(features));

  std::string text;
  double deviation = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      text += num(p(i, j));
      text += '\n';
      deviation += std::abs(std::abs(p(i, j)) - 1.0);
    }
  }
  write_file_atomic(out_path, text);
  out << "entries\t" << p.size() << "\n"
      << "mean_deviation\t" << num(deviation / static_cast<double>(p.size())) << "\n";

  if (bins > 0) {
    double lo = p.minCoeff();
    double hi = p.maxCoeff();
    if (lo == hi) {
      lo -= 0.5;
      hi += 0.5;
    }
    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    const double width = (hi - lo) / bins;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      auto b = static_cast<std::size_t>((p.data()[i] - lo) / width);
      counts[std::min(b, counts.size() - 1)]++;
    }
    std::string csv;
    for (std::size_t b = 0; b < counts.size(); ++b) {
      const double left = lo + width * static_cast<double>(b);
      const double right = b + 1 == counts.size() ? hi : lo + width * static_cast<double>(b + 1);
      csv += num(left) + "," + num(right) + "," + std::to_string(counts[b]) + "\n";
    }
    if (bins_out.empty()) bins_out = out_path + ".bins.csv";
    write_file_atomic(bins_out, csv);
  }
  return ok;
}

// ---- eval / search ---------------------------------------------------------

struct EvalFlags {
  std::string queries, db, query_labels, db_labels;
  std::string codes, labels;
  double query_frac = 0.1;
  bool per_class = false;
  std::vector<std::size_t> precision_at;
  bool macro = false;
  bool multilabel = false;
  bool json_out = false;
  std::string out;
  std::uint64_t seed = 0;
};

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  const bool paired = !f.queries.empty() || !f.db.empty() || !f.query_labels.empty() || !f.db_labels.empty();
  const bool split = !f.codes.empty() || !f.labels.empty();
  require(paired != split, "eval takes either --queries/--db/--query-labels/--db-labels or --codes/--labels");
  if (paired) {
    require(!f.queries.empty() && !f.db.empty() && !f.query_labels.empty() && !f.db_labels.empty(),
            "eval needs all of --queries, --db, --query-labels and --db-labels");
  } else {
    require(!f.codes.empty() && !f.labels.empty(), "eval needs both --codes and --labels");
    require(f.query_frac > 0.0 && f.query_frac < 1.0, "--query-frac must lie strictly between 0 and 1");
  }
  for (std::size_t m : f.precision_at) require(m >= 1, "--precision-at values must be positive");

  metrics::EvalOptions options;
  options.rule = f.multilabel ? metrics::RelevanceRule::any_shared_label : metrics::RelevanceRule::single_label;
  options.precision_at = f.precision_at;
  options.macro = f.macro;
  require(!(f.macro && f.multilabel), "--macro is defined for single-label relevance only");

  PackedCodes qc, dc;
  LabelSet ql, dl;
  if (paired) {
    qc = load_codes(f.queries);
    dc = load_codes(f.db);
    ql = load_labels(f.query_labels);
    dl = load_labels(f.db_labels);
    std::error_code ec;
    options.exclude_same_index = fs::equivalent(f.queries, f.db, ec) && !ec;
  } else {
    const PackedCodes all = load_codes(f.codes);
    const LabelSet labels = load_labels(f.labels);
    if (labels.size() != all.size()) {
      throw DataError(std::to_string(all.size()) + " codes but " + std::to_string(labels.size()) + " label rows");
    }
    synthetic::Split s;
    if (f.per_class) {
      std::vector<std::uint32_t> primary;
      for (const auto& l : labels) primary.push_back(l.front());
      s = synthetic::per_class_split(primary, f.query_frac, f.seed);
    } else {
      s = synthetic::uniform_split(all.size(), f.query_frac, f.seed);
    }
    qc = select_codes(all, s.queries);
    dc = select_codes(all, s.database);
    ql = select_labels(labels, s.queries);
    dl = select_labels(labels, s.database);
  }

  const metrics::RetrievalReport rep = metrics::evaluate(qc, ql, dc, dl, options);
  std::string text;
  if (f.json_out) {
    json j = {{"map", rep.map},
              {"queries", rep.queries.size()},
              {"queries_without_relevant", rep.queries_without_relevant},
              {"per_query_ap", rep.per_query_ap}};
    if (rep.macro_map) j["macro_map"] = *rep.macro_map;
    json p = json::object();
    for (const auto& [m, v] : rep.precision_at) p[std::to_string(m)] = v;
    j["precision_at"] = p;
    text = j.dump(2) + "\n";
  } else {
    text += "map\t" + num(rep.map) + "\n";
    if (rep.macro_map) text += "macro_map\t" + num(*rep.macro_map) + "\n";
    for (const auto& [m, v] : rep.precision_at) text += "precision@" + std::to_string(m) + "\t" + num(v) + "\n";
    text += "queries\t" + std::to_string(rep.queries.size()) + "\n";
    text += "queries_without_relevant\t" + std::to_string(rep.queries_without_relevant) + "\n";
    for (std::size_t q = 0; q < rep.queries.size(); ++q) {
      if (rep.queries[q].relevant > 0) text += "query\t" + std::to_string(q) + "\t" + num(rep.queries[q].ap) + "\n";
    }
  }
  emit(f.out, text, out);
  return ok;
}

int cmd_search(const std::string& queries, const std::string& db_path, std::size_t top, const std::string& out_path,
               std::ostream& out) {
  require(top >= 1, "--top must be positive");
  const PackedCodes qc = load_codes(queries);
  const search::CodeDatabase db(load_codes(db_path));
  std::string text;
  for (std::size_t q = 0; q < qc.size(); ++q) {
    const auto ranking = search::rank_all(qc.row(q), qc.bits(), db);
    for (std::size_t r = 0; r < std::min(top, ranking.size()); ++r) {
      text += std::to_string(q) + "\t" + std::to_string(r + 1) + "\t" + std::to_string(ranking[r].id) + "\t" +
              std::to_string(ranking[r].distance) + "\n";
    }
  }
  emit(out_path, text, out);
  return ok;
}

// ---- toy2d / bench ---------------------------------------------------------

struct Toy2dFlags {
  std::string out;
  std::string features;
  std::optional<double> alpha, beta;
  int points = 500;
  int iters = 70;
  std::uint64_t seed = 0;
};

std::string points_csv(const Matrix& p, const std::vector<std::uint32_t>* labels) {
  std::string csv;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    csv += num(p(i, 0)) + "," + num(p(i, 1));
    if (labels) csv += "," + std::to_string((*labels)[static_cast<std::size_t>(i)]);
    csv += "\n";
  }
  return csv;
}

int cmd_toy2d(const Toy2dFlags& f, std::ostream& out) {
  require(!f.out.empty(), "toy2d needs --out");
  require(f.alpha.has_value() == f.beta.has_value(), "toy2d takes --alpha and --beta together");
  require(f.points >= 4, "--points must be at least 4");
  std::vector<std::pair<double, double>> panels{{3.0, 50.0}, {3.0, 200.0}, {2.0, 50.0}, {4.0, 50.0}};
  if (f.alpha) panels = {{*f.alpha, *f.beta}};

  TrainConfig base;
  base.bits = 2;
  base.iterations = f.iters;
  base.seed = f.seed;
  for (auto [a, b] : panels) {
    TrainConfig c = base;
    c.alpha = a;
    c.beta = b;
    c.validate(2);
  }

  FeatureMatrix raw;
  std::vector<std::uint32_t> labels;
  if (f.features.empty()) {
    auto toy = synthetic::toy2d(f.points, f.seed);
    raw = std::move(toy.features);
    labels = std::move(toy.labels);
  } else {
    raw = read_features(f.features);
    if (raw.dim() != 2) throw DataError("toy2d needs 2-D features, got dimension " + std::to_string(raw.dim()));
  }
  const FeatureMatrix x = center(raw);
  const fs::path dir = f.out;
  fs::create_directories(dir);
  write_file_atomic(dir / "original.csv", points_csv(raw.data(), labels.empty() ? nullptr : &labels));

  auto panel_line = [&](const std::string& file, const TrainResult& r, const std::string& a, const std::string& b) {
    const double q = r.trace.empty() ? quantization_loss(x.data() * r.model.W, r.model.R, r.codes)
                                     : r.trace.back().quantization;
    out << "panel\t" << file << "\t" << a << "\t" << b << "\t" << num(orthogonality_residual(r.model.W)) << "\t"
        << num(q) << "\n";
  };
  out << "panel\tfile\talpha\tbeta\torthogonality_residual\tquantization\n";

  TrainConfig itq = base;
  itq.variant = Variant::itq;
  const TrainResult ri = train(x, itq);
  write_file_atomic(dir / "itq.csv", points_csv(project(ri.model, raw), nullptr));
  panel_line("itq.csv", ri, "-", "-");

  for (auto [a, b] : panels) {
    TrainConfig c = base;
    c.variant = Variant::snrq;
    c.alpha = a;
    c.beta = b;
    const TrainResult r = train(x, c);
    const std::string file = "snrq_a" + num(a) + "_b" + num(b) + ".csv";
    write_file_atomic(dir / file, points_csv(project(r.model, raw), nullptr));
    panel_line(file, r, num(a), num(b));
  }
  return ok;
}

struct BenchFlags {
  std::string features;
  bool synthetic = false;
  int samples = 5000;
  int dim = 512;
  int classes = 10;
  double noise = 1.5;
  std::vector<int> bits{32, 64};
  int iters = 70;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_bench(const BenchFlags& f, std::ostream& out) {
  require(f.synthetic != !f.features.empty(), "bench takes exactly one of --features or --synthetic");
  require(!f.bits.empty(), "--bits needs at least one code length");
  for (int k : f.bits) {
    TrainConfig c;
    c.bits = k;
    c.iterations = f.iters;
    c.validate(f.synthetic ? f.dim : -1);
  }
  FeatureMatrix raw;
  if (f.synthetic) {
    require(f.samples >= 2 && f.dim >= 1 && f.classes >= 1, "synthetic bench needs positive sizes");
    synthetic::MixtureSpec mix;
    mix.samples = f.samples;
    mix.dim = f.dim;
    mix.classes = f.classes;
    mix.noise = f.noise;
    mix.seed = f.seed;
    raw = synthetic::gaussian_mixture(mix).features;
  } else {
    raw = read_features(f.features);
  }
  const FeatureMatrix x = center(raw);

  std::string csv = "variant,bits,seconds,final_J,final_Q\n";
  for (int k : f.bits) {
    for (Variant v : {Variant::nrq, Variant::snrq}) {
      TrainConfig c;
      c.variant = v;
      c.bits = k;
      c.iterations = f.iters;
      c.seed = f.seed;
      const auto start = std::chrono::steady_clock::now();
      const TrainResult r = train(x, c);
      const double seconds = seconds_since(start);
      const double j = r.trace.empty() ? 0.0 : r.trace.back().objective;
      const double q = r.trace.empty() ? 0.0 : r.trace.back().quantization;
      csv += std::string(to_string(v)) + "," + std::to_string(k) + "," + num(seconds) + "," + num(j) + "," + num(q) +
             "\n";
    }
  }
  emit(f.out, csv, out);
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Binary hashing with non-rigid quantization", "nrqhash"};
  app.require_subcommand(1);

  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train", "learn a hashing model");
  train_cmd->add_option("--features", tf.features, "training features (.bhf or .csv)");
  train_cmd->add_option("--out", tf.out, "model output path");
  train_cmd->add_option("--manifest", tf.manifest, "manifest path (default <out>.manifest.json)");
  auto* from = train_cmd->add_option("--from-manifest", tf.from_manifest, "re-run a previous training manifest");
  std::vector<CLI::Option*> train_params{
      train_cmd->add_option("--bits", tf.bits, "code length K")->capture_default_str(),
      train_cmd->add_option("--variant", tf.variant, "itq, nrq or snrq")->capture_default_str(),
      train_cmd->add_option("--alpha", tf.alpha, "quantization weight")->capture_default_str(),
      train_cmd->add_option("--beta", tf.beta, "rigidness weight")->capture_default_str(),
      train_cmd->add_option("--iters", tf.iters, "outer iterations")->capture_default_str(),
      train_cmd->add_option("--regularizer", tf.regularizer, "so, dso or mc")->capture_default_str(),
      train_cmd->add_option("--seed", tf.seed, "random seed")->capture_default_str()};
  for (auto* o : train_params) from->excludes(o);
  from->excludes(train_cmd->get_option("--features"));

  std::string model, features, out_path;
  auto* encode_cmd = app.add_subcommand("encode", "encode features to packed codes");
  encode_cmd->add_option("--model", model)->required();
  encode_cmd->add_option("--features", features)->required();
  encode_cmd->add_option("--out", out_path)->required();

  EvalFlags ef;
  auto* eval_cmd = app.add_subcommand("eval", "retrieval evaluation");
  eval_cmd->add_option("--queries", ef.queries, "query codes");
  eval_cmd->add_option("--db", ef.db, "database codes");
  eval_cmd->add_option("--query-labels", ef.query_labels);
  eval_cmd->add_option("--db-labels", ef.db_labels);
  eval_cmd->add_option("--codes", ef.codes, "codes to split into queries and database");
  eval_cmd->add_option("--labels", ef.labels, "labels for --codes");
  eval_cmd->add_option("--query-frac", ef.query_frac)->capture_default_str();
  eval_cmd->add_flag("--per-class", ef.per_class, "sample the query fraction from every class");
  eval_cmd->add_option("--precision-at", ef.precision_at, "comma-separated M values")->delimiter(',');
  eval_cmd->add_flag("--macro", ef.macro, "also report the per-class average");
  eval_cmd->add_flag("--multilabel", ef.multilabel, "relevance is any shared label");
  eval_cmd->add_flag("--json", ef.json_out, "emit a JSON document instead of TSV");
  eval_cmd->add_option("--out", ef.out, "write the report here instead of stdout");
  eval_cmd->add_option("--seed", ef.seed)->capture_default_str();

  std::string sq, sdb, sout;
  std::size_t top = 10;
  auto* search_cmd = app.add_subcommand("search", "Hamming ranking of queries against a database");
  search_cmd->add_option("--queries", sq)->required();
  search_cmd->add_option("--db", sdb)->required();
  search_cmd->add_option("--top", top)->capture_default_str();
  search_cmd->add_option("--out", sout);

  std::string hmodel, hfeatures, hout, hbins_out;
  int bins = 0;
  auto* hist_cmd = app.add_subcommand("hist", "dump projected values XWR");
  hist_cmd->add_option("--model", hmodel)->required();
  hist_cmd->add_option("--features", hfeatures)->required();
  hist_cmd->add_option("--out", hout, "CSV with one value per line")->required();
  hist_cmd->add_option("--bins", bins, "also write a bin-count CSV")->capture_default_str();
  hist_cmd->add_option("--bins-out", hbins_out, "bin-count path (default <out>.bins.csv)");

  Toy2dFlags tyf;
  double toy_alpha = 0.0, toy_beta = 0.0;
  auto* toy_cmd = app.add_subcommand("toy2d", "2-D ITQ and SNRQ transforms as CSV");
  toy_cmd->add_option("--out", tyf.out, "output directory")->required();
  toy_cmd->add_option("--features", tyf.features, "2-D features instead of the generated set");
  auto* ta = toy_cmd->add_option("--alpha", toy_alpha);
  auto* tb = toy_cmd->add_option("--beta", toy_beta);
  toy_cmd->add_option("--points", tyf.points)->capture_default_str();
  toy_cmd->add_option("--iters", tyf.iters)->capture_default_str();
  toy_cmd->add_option("--seed", tyf.seed)->capture_default_str();

  BenchFlags bf;
  auto* bench_cmd = app.add_subcommand("bench", "training time of NRQ and SNRQ");
  bench_cmd->add_option("--features", bf.features);
  bench_cmd->add_flag("--synthetic", bf.synthetic, "generate a Gaussian mixture");
  bench_cmd->add_option("--samples", bf.samples)->capture_default_str();
  bench_cmd->add_option("--dim", bf.dim)->capture_default_str();
  bench_cmd->add_option("--classes", bf.classes)->capture_default_str();
  bench_cmd->add_option("--noise", bf.noise)->capture_default_str();
  bench_cmd->add_option("--bits", bf.bits, "comma-separated code lengths")->delimiter(',');
  bench_cmd->add_option("--iters", bf.iters)->capture_default_str();
  bench_cmd->add_option("--seed", bf.seed)->capture_default_str();
  bench_cmd->add_option("--out", bf.out, "CSV path (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  }

  try {
    if (*train_cmd) return cmd_train(tf, out, err);
    if (*encode_cmd) return cmd_encode(model, features, out_path, out);
    if (*eval_cmd) return cmd_eval(ef, out);
    if (*search_cmd) return cmd_search(sq, sdb, top, sout, out);
    if (*hist_cmd) return cmd_hist(hmodel, hfeatures, hout, bins, hbins_out, out);
    if (*toy_cmd) {
      if (*ta) tyf.alpha = toy_alpha;
      if (*tb) tyf.beta = toy_beta;
      return cmd_toy2d(tyf, out);
    }
    if (*bench_cmd) return cmd_bench(bf, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return data;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return numerical;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return data;
  }
  return usage;
}

}  // namespace nrq::cli
