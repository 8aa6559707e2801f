#include "cli.hpp"

#include "latentgeo/analytic.hpp"
#include "latentgeo/errors.hpp"
#include "latentgeo/geodesic.hpp"
#include "latentgeo/mlp.hpp"
#include "latentgeo/statistics.hpp"
#include "latentgeo/table_io.hpp"
#include "latentgeo/transport.hpp"
#include "latentgeo/vae.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace latentgeo::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

struct Options {
  std::string out, manifest;
  std::uint64_t seed = 0;

  // Models.
  std::string model, encoder;
  bool project = false;

  // Geodesic solver.
  int steps = 10;
  double alpha = 0.05;
  double epsilon = 0.0;
  int max_iters = 5000;
  std::string gradient_mode = "exact";
  bool no_backtracking = false;

  // Points, vectors and files.
  std::string from, to, a, b, c, velocity, vector, ambient_vector;
  std::string path, points, distances, labels, data, embedding;
  int shoot_steps = 0;
  double round_trip_budget = std::numeric_limits<double>::infinity();

  std::string mode = "geodesic";
  int jobs = 1;
  Index dims = 2;
  double frechet_step = 0.5;
  int frechet_iters = 100;
  std::size_t count = 50000;
  int samples = 100;

  // Training.
  bool full_config = false;
  int iterations = 0;
  double learning_rate = 0.0;
  int batch_size = 0;
  double likelihood_variance = 0.0;
  Index hidden = 0;
  Index latent_dim = 0;
};

// A generator g with an optional encoder h. Built-in surfaces own their
// nearest-point encoder; MLP files and VAE directories own networks.
struct Models {
  std::unique_ptr<AnalyticSurface> surface;
  std::unique_ptr<NearestPointEncoder> nearest;
  std::unique_ptr<MlpModel> generator_net;
  std::unique_ptr<MlpModel> encoder_net;
  const DifferentiableMap* generator = nullptr;
  const DifferentiableMap* encoder = nullptr;

  const DifferentiableMap& require_encoder() const {
    if (encoder == nullptr) {
      throw std::invalid_argument(
          "this operation needs an encoder: pass --encoder or a VAE directory as --model");
    }
    return *encoder;
  }
};

Models load_models(const std::string& model, const std::string& encoder_file) {
  Models m;
  const std::string prefix = "builtin:";
  if (model.rfind(prefix, 0) == 0) {
    const std::string name = model.substr(prefix.size());
    if (name == "paraboloid") {
      m.surface = std::make_unique<HyperbolicParaboloid>();
    } else if (name == "flat") {
      m.surface = std::make_unique<FlatEmbedding>(FlatEmbedding::padded_identity(2, 3));
    } else if (name == "sphere" || name.rfind("sphere:", 0) == 0) {
      const double radius = name == "sphere" ? 1.0 : parse_number(name.substr(7));
      m.surface = std::make_unique<SphereChart>(radius);
    } else {
      throw std::invalid_argument("unknown built-in model \"" + name +
                                  "\" (paraboloid, flat, sphere[:radius])");
    }
    m.nearest = std::make_unique<NearestPointEncoder>(*m.surface);
    m.generator = m.surface.get();
    m.encoder = m.nearest.get();
  } else if (fs::is_directory(model)) {
    const VaeModel vae = load_vae(model);
    m.generator_net = std::make_unique<MlpModel>(vae.decoder);
    m.encoder_net = std::make_unique<MlpModel>(vae.encoder());
  } else {
    m.generator_net = std::make_unique<MlpModel>(load_model(model));
  }
  if (!encoder_file.empty()) m.encoder_net = std::make_unique<MlpModel>(load_model(encoder_file));
  if (m.generator_net) m.generator = m.generator_net.get();
  if (m.encoder_net) m.encoder = m.encoder_net.get();
  if (m.encoder && (m.encoder->input_dim() != m.generator->output_dim() ||
                    m.encoder->output_dim() != m.generator->input_dim())) {
    throw DimensionError("encoder dimensions do not invert the generator");
  }
  return m;
}

struct Record {
  std::string command;
  json inputs = json::object();
  json outputs = json::object();
  json diagnostics = json::object();
};

class Command {
 public:
  Command(const Options& opts, Record& record, std::ostream& out, std::ostream& err)
      : opts_(opts), record_(record), out_(out), err_(err) {}

  int sample_paraboloid();
  int train_vae();
  int geodesic();
  int shoot();
  int translate();
  int analogy();
  int frechet_mean();
  int distance_matrix();
  int r2();
  int mds();
  int check_immersion();

 private:
  const Models& models() {
    if (!models_) {
      if (opts_.model.empty()) throw std::invalid_argument("--model is required");
      models_ = load_models(opts_.model, opts_.encoder);
      record_.inputs["model"] = opts_.model;
      if (!opts_.encoder.empty()) record_.inputs["encoder"] = opts_.encoder;
    }
    return *models_;
  }

  // A latent point from the command line; ambient when --project is set.
  LatentPoint point_arg(const std::string& text, const char* what) {
    if (text.empty()) throw std::invalid_argument(std::string("--") + what + " is required");
    const Vector v = parse_vector(text);
    return opts_.project ? models().require_encoder().evaluate(v) : v;
  }

  std::vector<LatentPoint> points_file(std::vector<std::string>* labels = nullptr) {
    if (opts_.points.empty()) throw std::invalid_argument("--points is required");
    PointTable table = load_points_csv(opts_.points);
    record_.inputs["points"] = opts_.points;
    if (labels) *labels = table.labels;
    if (opts_.project) {
      for (auto& p : table.points) p = models().require_encoder().evaluate(p);
    }
    return std::move(table.points);
  }

  GeodesicConfig geodesic_config() const {
    GeodesicConfig c;
    c.steps = opts_.steps;
    c.alpha = opts_.alpha;
    if (opts_.epsilon > 0.0) c.epsilon = opts_.epsilon;
    c.max_iters = opts_.max_iters;
    c.gradient_mode =
        opts_.gradient_mode == "encoder" ? GradientMode::encoder : GradientMode::exact;
    c.backtracking = !opts_.no_backtracking;
    c.validate();
    return c;
  }

  void emit(const std::string& text) {
    if (opts_.out.empty()) {
      out_ << text;
      record_.outputs["result"] = "stdout";
    } else {
      save_text(opts_.out, text);
      record_.outputs["result"] = opts_.out;
    }
  }
  void emit(const json& doc) { emit(doc.dump(2) + "\n"); }

  const Options& opts_;
  Record& record_;
  std::ostream& out_;
  std::ostream& err_;
  std::optional<Models> models_;
};

int Command::sample_paraboloid() {
  if (opts_.count < 1) throw std::invalid_argument("--n must be at least 1");
  const auto points = latentgeo::sample_paraboloid(opts_.count, opts_.seed);
  std::ostringstream text;
  write_points_csv(text, points);
  emit(text.str());
  record_.diagnostics["count"] = opts_.count;
  return kOk;
}

int Command::train_vae() {
  if (opts_.data.empty()) throw std::invalid_argument("--data is required");
  if (opts_.out.empty()) throw std::invalid_argument("--out (model directory) is required");
  TrainConfig config = opts_.full_config ? TrainConfig::full() : TrainConfig::desk();
  config.seed = opts_.seed;
  if (opts_.iterations > 0) config.iterations = opts_.iterations;
  if (opts_.learning_rate > 0.0) config.learning_rate = opts_.learning_rate;
  if (opts_.batch_size > 0) config.batch_size = opts_.batch_size;
  if (opts_.likelihood_variance > 0.0) config.likelihood_variance = opts_.likelihood_variance;
  if (opts_.hidden > 0) config.hidden = opts_.hidden;
  if (opts_.latent_dim > 0) config.latent_dim = opts_.latent_dim;
  config.validate();

  const PointTable table = load_points_csv(opts_.data);
  record_.inputs["data"] = opts_.data;
  const TrainResult result = latentgeo::train_vae(table.points, config);
  save_vae(result.model, opts_.out);

  std::ostringstream loss;
  loss << "iteration,loss\n";
  for (std::size_t i = 0; i < result.loss_history.size(); ++i) {
    loss << i << ',' << format_number(result.loss_history[i]) << '\n';
  }
  save_text(fs::path(opts_.out) / "loss.csv", loss.str());
  record_.outputs["model"] = opts_.out;
  record_.outputs["loss"] = (fs::path(opts_.out) / "loss.csv").string();

  std::mt19937_64 rng(opts_.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<LatentPoint> probes(100, Vector(config.latent_dim));
  for (auto& z : probes) {
    for (Index k = 0; k < z.size(); ++k) z(k) = normal(rng);
  }
  const ImmersionReport report = latentgeo::check_immersion(result.model.decoder, probes);

  const auto& h = result.loss_history;
  const std::size_t window = std::min<std::size_t>(100, h.size());
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < window; ++i) {
    first += h[i];
    last += h[h.size() - 1 - i];
  }
  record_.diagnostics = {{"iterations", config.iterations},
                         {"learning_rate", config.learning_rate},
                         {"batch_size", config.batch_size},
                         {"likelihood_variance", config.likelihood_variance},
                         {"parameters", parameter_count(result.model)},
                         {"first_window_loss", window ? first / window : 0.0},
                         {"last_window_loss", window ? last / window : 0.0},
                         {"decoder_immersion_ok", report.all_ok()}};
  return kOk;
}

int Command::geodesic() {
  const Models& m = models();
  const GeodesicConfig config = geodesic_config();
  const LatentPoint z0 = point_arg(opts_.from, "from");
  const LatentPoint zT = point_arg(opts_.to, "to");
  const GeodesicResult result = geodesic_path(*m.generator, m.encoder, z0, zT, config);

  std::ostringstream text;
  write_path_csv(text, result.path);
  emit(text.str());
  record_.diagnostics = {
      {"iterations", result.iterations},
      {"gradient_norm_sq", result.gradient_norm_sq},
      {"tolerance", config.tolerance()},
      {"converged", result.converged},
      {"arc_length", discrete_arc_length(*m.generator, result.path)},
      {"linear_arc_length",
       discrete_arc_length(*m.generator, DiscretePath::linear(z0, zT, config.steps))},
      {"energy", discrete_energy(*m.generator, result.path)},
      {"energy_history", result.energy_history}};
  return result.converged ? kOk : kNotConverged;
}

int Command::shoot() {
  const Models& m = models();
  LatentPoint z0;
  Vector u0;
  int steps = opts_.shoot_steps;
  if (!opts_.path.empty()) {
    const DiscretePath path = load_path_csv(opts_.path);
    record_.inputs["path"] = opts_.path;
    z0 = path.front();
    u0 = initial_velocity(*m.generator, path).components;
    if (steps <= 0) steps = path.steps();
  } else {
    z0 = point_arg(opts_.from, "from");
    if (opts_.velocity.empty()) throw std::invalid_argument("--velocity or --path is required");
    u0 = parse_vector(opts_.velocity);
  }
  if (steps < 1) steps = 10;
  ShootOptions options;
  options.round_trip_budget = opts_.round_trip_budget;
  const ShootResult result =
      geodesic_shoot(*m.generator, m.require_encoder(), z0,
                     TangentVector::ambient(m.generator->evaluate(z0), u0), steps, options);
  std::ostringstream text;
  write_path_csv(text, result.path);
  emit(text.str());
  record_.diagnostics = {{"steps", steps},
                         {"initial_speed", u0.norm()},
                         {"arc_length", discrete_arc_length(*m.generator, result.path)},
                         {"endpoint", to_json(result.path.back())},
                         {"max_round_trip_error", result.max_round_trip_error}};
  return kOk;
}

int Command::translate() {
  const Models& m = models();
  if (opts_.path.empty()) throw std::invalid_argument("--path is required");
  const DiscretePath path = load_path_csv(opts_.path);
  record_.inputs["path"] = opts_.path;
  TranslationResult result = [&] {
    if (!opts_.ambient_vector.empty()) {
      return parallel_translate_ambient(*m.generator, m.require_encoder(), path,
                                        parse_vector(opts_.ambient_vector));
    }
    if (opts_.vector.empty()) throw std::invalid_argument("--vector or --ambient-vector is required");
    return parallel_translate(*m.generator, m.require_encoder(), path,
                              TangentVector::latent(path.front(), parse_vector(opts_.vector)));
  }();
  emit(json{{"base", to_json(path.back())},
            {"latent", to_json(result.latent.components)},
            {"ambient", to_json(result.ambient.components)},
            {"ambient_norm_initial", result.ambient_steps.front().norm()},
            {"ambient_norm_final", result.ambient.components.norm()}});
  return kOk;
}

int Command::analogy() {
  const Models& m = models();
  const GeodesicConfig config = geodesic_config();
  const LatentPoint a = point_arg(opts_.a, "a");
  const LatentPoint b = point_arg(opts_.b, "b");
  const LatentPoint c = point_arg(opts_.c, "c");
  ShootOptions options;
  options.round_trip_budget = opts_.round_trip_budget;
  const AnalogyResult result =
      geodesic_analogy(*m.generator, m.require_encoder(), a, b, c, config, options);
  const LatentPoint linear = linear_analogy(a, b, c);
  emit(json{{"answer", to_json(result.answer)},
            {"answer_ambient", to_json(m.generator->evaluate(result.answer))},
            {"linear_answer", to_json(linear)},
            {"arc_length_ab", result.arc_length_ab},
            {"shoot_arc_length", result.shoot_arc_length},
            {"geodesics_converged", result.geodesics_converged}});
  record_.diagnostics["geodesics_converged"] = result.geodesics_converged;
  return result.geodesics_converged ? kOk : kNotConverged;
}

int Command::frechet_mean() {
  const Models& m = models();
  const std::vector<LatentPoint> points = points_file();
  FrechetOptions options;
  options.step = opts_.frechet_step;
  options.max_iters = opts_.frechet_iters;
  const FrechetResult result =
      latentgeo::frechet_mean(*m.generator, m.encoder, points, geodesic_config(), options);
  emit(json{{"mean", to_json(result.mean)},
            {"mean_ambient", to_json(m.generator->evaluate(result.mean))},
            {"linear_mean", to_json(linear_mean(points))},
            {"objective_history", result.objective_history},
            {"iterations", result.iterations},
            {"converged", result.converged}});
  record_.diagnostics["converged"] = result.converged;
  return result.converged ? kOk : kNotConverged;
}

int Command::distance_matrix() {
  if (opts_.mode != "linear" && opts_.mode != "geodesic") {
    throw std::invalid_argument("--mode must be linear or geodesic");
  }
  const Models& m = models();
  const std::vector<LatentPoint> points = points_file();
  const DistanceMode mode = opts_.mode == "linear" ? DistanceMode::linear : DistanceMode::geodesic;
  const DistanceMatrix d =
      latentgeo::distance_matrix(*m.generator, m.encoder, points, mode, geodesic_config(), opts_.jobs);
  std::ostringstream text;
  write_matrix_csv(text, d.values);
  emit(text.str());
  record_.diagnostics = {{"size", d.size()}, {"unconverged_pairs", d.unconverged_pairs}};
  return d.unconverged_pairs == 0 ? kOk : kNotConverged;
}

DistanceMatrix read_distances(const Options& opts, Record& record) {
  if (opts.distances.empty()) throw std::invalid_argument("--distances is required");
  record.inputs["distances"] = opts.distances;
  return make_distance_matrix(load_matrix_csv(opts.distances), DistanceMode::linear);
}

std::vector<std::string> read_labels(const std::string& file, Record& record) {
  PointTable table = load_points_csv(file);
  if (table.labels.empty()) throw FormatError(file + " has no label column");
  record.inputs["labels"] = file;
  return std::move(table.labels);
}

int Command::r2() {
  const DistanceMatrix d = read_distances(opts_, record_);
  if (opts_.labels.empty()) throw std::invalid_argument("--labels is required");
  const std::vector<std::string> labels = read_labels(opts_.labels, record_);
  const double score = r2_score(d, labels);
  const std::set<std::string> groups(labels.begin(), labels.end());
  emit(json{{"r2", score}, {"points", d.size()}, {"groups", groups.size()}});
  return kOk;
}

int Command::mds() {
  const DistanceMatrix d = read_distances(opts_, record_);
  const MdsResult result = classical_mds(d, opts_.dims);
  std::ostringstream text;
  text << "eigenvalue\n";
  for (Index k = 0; k < result.eigenvalues.size(); ++k) {
    text << format_number(result.eigenvalues(k)) << '\n';
  }
  emit(text.str());
  if (!opts_.embedding.empty()) {
    std::vector<std::string> labels;
    if (!opts_.labels.empty()) labels = read_labels(opts_.labels, record_);
    std::vector<Vector> rows;
    for (Index r = 0; r < result.embedding.rows(); ++r) rows.emplace_back(result.embedding.row(r));
    std::ostringstream emb;
    write_points_csv(emb, rows, labels, "z");
    save_text(opts_.embedding, emb.str());
    record_.outputs["embedding"] = opts_.embedding;
  }
  record_.diagnostics = {{"positive", result.positive_count},
                         {"zero", result.zero_count},
                         {"negative", result.negative_count},
                         {"negative_mass_ratio", result.negative_mass_ratio},
                         {"truncated", result.truncated}};
  if (result.truncated) {
    err_ << json{{"warning", "embedding_truncated"},
                 {"message", "fewer positive eigenvalues than requested dimensions"},
                 {"dimensions", result.embedding.cols()}}
                .dump()
         << '\n';
  }
  return kOk;
}

int Command::check_immersion() {
  const Models& m = models();
  const auto* net = dynamic_cast<const MlpModel*>(m.generator);
  std::mt19937_64 rng(opts_.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<LatentPoint> probes(static_cast<std::size_t>(std::max(opts_.samples, 0)),
                                  Vector(m.generator->input_dim()));
  for (auto& z : probes) {
    for (Index k = 0; k < z.size(); ++k) z(k) = normal(rng);
  }
  json doc;
  bool ok = true;
  if (net) {
    const ImmersionReport report = latentgeo::check_immersion(*net, probes);
    ok = report.all_ok();
    doc = {{"weight_ranks", report.weight_ranks},
           {"weight_rank_ok", report.weight_rank_ok},
           {"jacobian_ranks", report.jacobian_ranks},
           {"jacobian_rank_ok", report.jacobian_rank_ok}};
  } else {
    std::vector<Index> ranks;
    std::vector<bool> rank_ok;
    for (const auto& z : probes) {
      ranks.push_back(numerical_rank(m.generator->jacobian(z)));
      rank_ok.push_back(ranks.back() == m.generator->input_dim());
      ok = ok && rank_ok.back();
    }
    doc = {{"jacobian_ranks", ranks}, {"jacobian_rank_ok", rank_ok}};
  }
  doc["all_ok"] = ok;
  emit(doc);
  record_.diagnostics["all_ok"] = ok;
  if (!ok) {
    err_ << json{{"error", "rank_deficient"},
                 {"message", "the generator is not an immersion at every probe"}}
                .dump()
         << '\n';
    return kFailure;
  }
  return kOk;
}

json error_document(const std::exception& e, const std::string& command) {
  json doc = {{"error", "error"}, {"message", e.what()}, {"command", command}};
  if (const auto* err = dynamic_cast<const Error*>(&e)) doc["error"] = err->kind();
  if (dynamic_cast<const std::invalid_argument*>(&e)) doc["error"] = "invalid_argument";
  if (dynamic_cast<const fs::filesystem_error*>(&e)) doc["error"] = "io_error";
  if (const auto* t = dynamic_cast<const DegenerateTransportError*>(&e)) doc["step"] = t->step();
  if (const auto* d = dynamic_cast<const EncoderDivergenceError*>(&e)) {
    doc["step"] = d->step();
    doc["round_trip_error"] = d->round_trip_error();
  }
  if (const auto* p = dynamic_cast<const PairFailureError*>(&e)) {
    doc["pair"] = {p->first(), p->second()};
  }
  return doc;
}

// Echo of every option the subcommand knows, parsed or defaulted.
json config_echo(const CLI::App& sub) {
  json config = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_name() == "--help") continue;
    std::string name = opt->get_name();
    while (!name.empty() && name.front() == '-') name.erase(0, 1);
    if (!opt->results().empty()) {
      config[name] = opt->results().size() == 1 ? json(opt->results().front()) : json(opt->results());
    } else if (!opt->get_default_str().empty()) {
      config[name] = opt->get_default_str();
    }
  }
  return config;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opts;
  CLI::App app{"Geometry on manifolds defined by generator maps"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", opts.out, "Result file (stdout when omitted)");
    sub->add_option("--manifest", opts.manifest,
                    "Run manifest (default <out>.manifest.json or <command>.manifest.json)");
    sub->add_option("--seed", opts.seed, "Seed for all randomness")->capture_default_str();
  };
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--model", opts.model,
                    "MLP JSON file, VAE directory, or builtin:paraboloid|flat|sphere[:r]")
        ->required();
    sub->add_option("--encoder", opts.encoder, "Encoder MLP JSON file");
    sub->add_flag("--project", opts.project, "Inputs are ambient points, mapped through h first");
  };
  auto add_solver = [&](CLI::App* sub) {
    sub->add_option("--steps", opts.steps, "Discretization T")->capture_default_str();
    sub->add_option("--alpha", opts.alpha, "Initial step size")->capture_default_str();
    sub->add_option("--epsilon", opts.epsilon, "Stopping threshold (default 1e-6 * T)");
    sub->add_option("--max-iters", opts.max_iters, "Sweep limit")->capture_default_str();
    sub->add_option("--gradient-mode", opts.gradient_mode, "exact or encoder")
        ->check(CLI::IsMember({"exact", "encoder"}))
        ->capture_default_str();
    sub->add_flag("--no-backtracking", opts.no_backtracking, "Fixed steps of size alpha");
  };

  using Handler = int (Command::*)();
  std::vector<std::pair<CLI::App*, Handler>> handlers;
  auto command = [&](const char* name, const char* help, Handler handler) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub);
    handlers.emplace_back(sub, handler);
    return sub;
  };

  CLI::App* sub = command("sample-paraboloid", "Sample points of the hyperbolic paraboloid",
                          &Command::sample_paraboloid);
  sub->add_option("--n", opts.count, "Number of points")->capture_default_str();

  sub = command("train-vae", "Train the FC-100 ELU VAE", &Command::train_vae);
  sub->add_option("--data", opts.data, "Point CSV")->required();
  sub->add_flag("--full-config", opts.full_config, "Batch 100, lr 1e-4, 100k iterations");
  sub->add_option("--iterations", opts.iterations, "Minibatch iterations");
  sub->add_option("--learning-rate", opts.learning_rate, "SGD step on the batch-sum loss");
  sub->add_option("--batch-size", opts.batch_size, "Minibatch size");
  sub->add_option("--likelihood-variance", opts.likelihood_variance, "Gaussian likelihood variance");
  sub->add_option("--hidden", opts.hidden, "Hidden layer width");
  sub->add_option("--latent-dim", opts.latent_dim, "Latent dimension");

  sub = command("geodesic", "Discrete geodesic between two points", &Command::geodesic);
  add_model(sub);
  add_solver(sub);
  sub->add_option("--from", opts.from, "Start point, comma separated")->required();
  sub->add_option("--to", opts.to, "End point, comma separated")->required();

  sub = command("shoot", "Geodesic shooting", &Command::shoot);
  add_model(sub);
  sub->add_option("--path", opts.path, "Shoot with the initial velocity of this path");
  sub->add_option("--from", opts.from, "Start point");
  sub->add_option("--velocity", opts.velocity, "Ambient initial velocity");
  sub->add_option("--steps", opts.shoot_steps, "Steps (default: those of --path, else 10)");
  sub->add_option("--round-trip-budget", opts.round_trip_budget, "Largest allowed |g(h(x)) - x|");

  sub = command("translate", "Parallel translation along a path", &Command::translate);
  add_model(sub);
  sub->add_option("--path", opts.path, "Path CSV")->required();
  sub->add_option("--vector", opts.vector, "Latent tangent vector at the first point");
  sub->add_option("--ambient-vector", opts.ambient_vector, "Ambient tangent vector at g(z_0)");

  sub = command("analogy", "Geodesic analogy a:b::c:?", &Command::analogy);
  add_model(sub);
  add_solver(sub);
  sub->add_option("--a", opts.a)->required();
  sub->add_option("--b", opts.b)->required();
  sub->add_option("--c", opts.c)->required();
  sub->add_option("--round-trip-budget", opts.round_trip_budget, "Largest allowed |g(h(x)) - x|");

  sub = command("frechet-mean", "Frechet mean of a point set", &Command::frechet_mean);
  add_model(sub);
  add_solver(sub);
  sub->add_option("--points", opts.points, "Point CSV")->required();
  sub->add_option("--step", opts.frechet_step, "Karcher step")->capture_default_str();
  sub->add_option("--frechet-iters", opts.frechet_iters, "Karcher iterations")->capture_default_str();

  sub = command("distance-matrix", "Pairwise linear or geodesic distances",
                &Command::distance_matrix);
  add_model(sub);
  add_solver(sub);
  sub->add_option("--points", opts.points, "Point CSV")->required();
  sub->add_option("--mode", opts.mode, "linear or geodesic")
      ->check(CLI::IsMember({"linear", "geodesic"}))
      ->capture_default_str();
  sub->add_option("--jobs", opts.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  sub = command("r2", "Grouping score of a distance matrix", &Command::r2);
  sub->add_option("--distances", opts.distances, "Headerless square CSV")->required();
  sub->add_option("--labels", opts.labels, "Point CSV with a label column")->required();

  sub = command("mds", "Classical MDS eigenvalues and embedding", &Command::mds);
  sub->add_option("--distances", opts.distances, "Headerless square CSV")->required();
  sub->add_option("--dims", opts.dims, "Embedding dimension")->capture_default_str();
  sub->add_option("--embedding", opts.embedding, "Write the embedding CSV here");
  sub->add_option("--labels", opts.labels, "Point CSV whose labels go into the embedding");

  sub = command("check-immersion", "Rank checks of the generator", &Command::check_immersion);
  add_model(sub);
  sub->add_option("--samples", opts.samples, "Random latent probes")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::string context;
    for (const auto* parsed : app.get_subcommands()) context = parsed->get_name();
    err << json{{"error", "usage"}, {"message", e.what()}, {"command", context}}.dump() << '\n';
    return kUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  Handler handler = nullptr;
  for (const auto& [s, h] : handlers) {
    if (s == chosen) handler = h;
  }

  Record record;
  record.command = chosen->get_name();
  const auto start = std::chrono::steady_clock::now();
  int code = kOk;
  json error;
  Command cmd(opts, record, out, err);
  try {
    code = (cmd.*handler)();
  } catch (const std::exception& e) {
    error = error_document(e, record.command);
    err << error.dump() << '\n';
    code = kFailure;
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::string manifest_path = opts.manifest;
  if (manifest_path.empty()) {
    manifest_path = opts.out.empty() ? record.command + ".manifest.json" : opts.out + ".manifest.json";
  }
  json manifest = {{"command", record.command},
                   {"config", config_echo(*chosen)},
                   {"seed", opts.seed},
                   {"inputs", record.inputs},
                   {"outputs", record.outputs},
                   {"diagnostics", record.diagnostics},
                   {"exit_code", code},
                   {"wall_time_seconds", wall}};
  if (!error.is_null()) manifest["error"] = error;
  try {
    save_text(manifest_path, manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << json{{"error", "io_error"}, {"message", e.what()}, {"command", record.command}}.dump()
        << '\n';
    return kFailure;
  }
  return code;
}

}  // namespace latentgeo::cli
