#include "auxguide/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "auxguide/autoencoder.hpp"
#include "auxguide/dataset.hpp"
#include "auxguide/decomposition.hpp"
#include "auxguide/denoiser.hpp"
#include "auxguide/error.hpp"
#include "auxguide/pipeline.hpp"
#include "auxguide/rng.hpp"
#include "auxguide/synthetic.hpp"

namespace auxguide::cli {

namespace {

namespace fs = std::filesystem;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Options {
  std::uint64_t seed = 0;
  std::string config;
  std::string dataset;
  std::string checkpoint;
  std::string out;
  std::string samples;
  std::size_t steps = 50;
  std::vector<double> wc{2.0};
  std::vector<double> wz{0.0};
  std::vector<double> sweep_wz;
  std::size_t frames = 64;
  double fps = 30.0;

  std::size_t n = 0;
  double noise = 0.0;
  std::size_t iters = 0;
  std::size_t batch = 0;
  double lr = 0.0;
  std::size_t warmup = 0;
  std::size_t decay_after = 0;
  std::size_t hidden = 256;
  bool linear = false;
  bool grad_check = false;
  double grad_eps = 1e-6;
  double dropout = 0.1;
  std::size_t dim = 8;
  std::size_t dz = 3;
  double sigma = 1.0;
};

void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw Error(ErrorCode::UsageError, flag + " is required");
}

void apply_config(CLI::App* sub, const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config file " + file);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, file + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, file + " must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "config") continue;
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt)
      throw Error(ErrorCode::ConfigError,
                  "config key '" + key + "' is not an option of " + sub->get_name());
    if (opt->count() > 0) continue;  // command-line flags win
    auto add = [&](const nlohmann::json& v) {
      if (v.is_string())
        opt->add_result(v.get<std::string>());
      else if (v.is_boolean())
        opt->add_result(v.get<bool>() ? "true" : "false");
      else if (v.is_number())
        opt->add_result(v.dump());
      else
        throw Error(ErrorCode::ConfigError, "config key '" + key + "' has an unsupported type");
    };
    if (value.is_array())
      for (const auto& v : value) add(v);
    else
      add(value);
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw Error(ErrorCode::ConfigError, "config key '" + key + "': " + e.what());
    }
  }
}

diffusion::GuidanceWeights single_weights(const Options& o) {
  if (o.wc.size() != 1 || o.wz.size() != 1)
    throw Error(ErrorCode::UsageError, "sample takes a single --wc and --wz value");
  return {o.wc.front(), o.wz.front()};
}

int gen_data(const Options& o, std::ostream& out) {
  require(o.out, "--out");
  synthetic::GenConfig cfg{o.frames, o.fps, o.seed, o.noise};
  synthetic::generate_dataset(o.n, cfg, synthetic::LabelMix{}, o.out);
  out << "wrote " << o.n << " records to " << o.out << "\n";
  return 0;
}

void write_curve(const fs::path& path, const nn::TrainLog& log) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  f << "step,loss\n";
  for (const auto& [step, loss] : log.curve) f << step << "," << num(loss) << "\n";
}

void print_log(const nn::TrainLog& log, std::ostream& out, std::ostream& err) {
  out << "initial_loss " << num(log.initial_loss) << "\n";
  out << "final_loss " << num(log.final_loss) << "\n";
  out << "reduction " << num(log.initial_loss / log.final_loss) << "\n";
  for (const auto& w : log.warnings) err << "warning: " << w << "\n";
}

int train_ae(const Options& o, std::ostream& out, std::ostream& err) {
  require(o.dataset, "--dataset");
  require(o.checkpoint, "--checkpoint");
  const auto records = dataset::read_jsonl(o.dataset);
  autoencoder::Config cfg;
  cfg.hidden = o.hidden;
  cfg.linear_only = o.linear;
  autoencoder::Autoencoder ae(cfg, o.seed);
  autoencoder::TrainConfig tc;
  tc.iters = o.iters;
  tc.batch = o.batch;
  tc.adam.lr = o.lr;
  tc.adam.warmup = o.warmup;
  tc.adam.decay_after = o.decay_after;
  tc.seed = o.seed;
  const auto log = autoencoder::train(ae, records, tc);
  const fs::path dir = fs::path(o.checkpoint) / "ae";
  ae.save(dir);
  write_curve(dir / "train_log.csv", log);
  print_log(log, out, err);
  if (o.grad_check) {
    const auto windows = autoencoder::all_windows(records, cfg.downsample);
    const std::size_t take = std::min<std::size_t>(4, windows.size());
    const auto batch = autoencoder::make_batch(
        records, std::span<const autoencoder::WindowRef>(windows.data(), take), cfg.downsample);
    const auto gc = autoencoder::grad_check(ae, batch, o.grad_eps, 64, o.seed);
    out << "grad_check_max_rel_error " << num(gc.max_rel_error) << "\n";
  }
  return 0;
}

int train_denoiser(const Options& o, std::ostream& out, std::ostream& err) {
  require(o.dataset, "--dataset");
  require(o.checkpoint, "--checkpoint");
  const auto records = dataset::read_jsonl(o.dataset);
  const auto ae = autoencoder::Autoencoder::load(fs::path(o.checkpoint) / "ae");
  const auto latents = pipeline::encode_dataset(ae, records);
  diffusion::MlpDenoiserConfig cfg;
  cfg.width = ae.config().latent_dim();
  cfg.hidden = o.hidden;
  cfg.linear_only = o.linear;
  diffusion::MlpDenoiser d(cfg, o.seed);
  pipeline::fit_standardization(latents.rows, d.shift, d.scale);
  const Matrix z = pipeline::standardize(latents.rows, d.shift, d.scale);
  diffusion::DenoiserTrainConfig tc;
  tc.iters = o.iters;
  tc.batch = o.batch;
  tc.adam.lr = o.lr;
  tc.adam.warmup = o.warmup;
  tc.adam.decay_after = o.decay_after;
  tc.seed = o.seed;
  tc.cond_dropout = o.dropout;
  const auto log = diffusion::train_denoiser(d, z, latents.labels, tc);
  const fs::path dir = fs::path(o.checkpoint) / "denoiser";
  d.save(dir);
  write_curve(dir / "train_log.csv", log);
  print_log(log, out, err);
  if (o.grad_check) {
    Rng rng(o.seed, {0x6763ULL});
    const std::vector<std::size_t> rows{0, z.rows() / 2, z.rows() - 1};
    const auto batch =
        diffusion::make_denoiser_batch(z, latents.labels, rows, d.schedule(), o.dropout, rng);
    const auto gc = diffusion::grad_check(d, batch, o.grad_eps, 64, o.seed);
    out << "grad_check_max_rel_error " << num(gc.max_rel_error) << "\n";
  }
  return 0;
}

std::vector<synthetic::ConditionLabel> sample_labels(const Options& o) {
  if (!o.dataset.empty()) return pipeline::labels_of(dataset::read_jsonl(o.dataset), o.n);
  return synthetic::assign_labels(o.n, synthetic::LabelMix{}, o.seed);
}

pipeline::GenerateConfig generate_config(const Options& o, diffusion::GuidanceWeights w) {
  pipeline::GenerateConfig g;
  g.frames = o.frames;
  g.fps = o.fps;
  g.sample.steps = o.steps;
  g.sample.weights = w;
  g.sample.seed = o.seed;
  return g;
}

int sample(const Options& o, std::ostream& out) {
  require(o.checkpoint, "--checkpoint");
  require(o.out, "--out");
  const auto ae = autoencoder::Autoencoder::load(fs::path(o.checkpoint) / "ae");
  const auto d = diffusion::MlpDenoiser::load(fs::path(o.checkpoint) / "denoiser");
  const auto recs = pipeline::generate(ae, d, sample_labels(o), generate_config(o, single_weights(o)));
  dataset::write_jsonl(o.out, recs);
  out << "wrote " << recs.size() << " samples to " << o.out << "\n";
  return 0;
}

int eval(const Options& o, std::ostream& out) {
  require(o.dataset, "--dataset");
  require(o.samples, "--samples");
  const auto rep = pipeline::evaluate(dataset::read_jsonl(o.samples), dataset::read_jsonl(o.dataset));
  std::ostringstream csv;
  csv << "metric,value\n";
  nlohmann::ordered_json j;
  for (const auto& [k, v] : rep.values) {
    csv << k << "," << num(v) << "\n";
    j[k] = v;
  }
  out << csv.str();
  if (!o.out.empty()) {
    std::ofstream c(o.out + ".csv", std::ios::trunc), js(o.out + ".json", std::ios::trunc);
    if (!c || !js) throw Error(ErrorCode::IoError, "cannot write report " + o.out + ".{csv,json}");
    c << csv.str();
    js << j.dump(2) << "\n";
  }
  return 0;
}

int verify_lemma(const Options& o, std::ostream& out) {
  if (o.dz == 0 || o.dz >= o.dim) throw Error(ErrorCode::UsageError, "need 0 < --dz < --dim");
  Rng rng(o.seed, {0x6c656d6dULL});
  Matrix f(o.dz, o.dim);
  rng.fill_normal(f.data());
  decomposition::IsotropicGaussian g{Vector(o.dim), o.sigma};
  rng.fill_normal(g.mu);
  const auto proj = linalg::projector_pair(f);
  const auto rep = decomposition::cochran_check(g, proj, o.n, o.seed);
  const double density = decomposition::density_factor_check(g, proj, 1000, o.seed);

  // F E[u | z] must reproduce z.
  Vector z(o.dz);
  rng.fill_normal(z);
  const Vector m = decomposition::conditional_mean(g, f, z);
  const Vector fm = f * std::span<const double>(m);
  double cm_dev = 0.0;
  for (std::size_t i = 0; i < o.dz; ++i) cm_dev = std::max(cm_dev, std::abs(fm[i] - z[i]));

  std::vector<decomposition::BandCheck> rows = rep.checks;
  rows.push_back({"log-density factorization", density, 1e-8, density < 1e-8});
  rows.push_back({"F E[u|z] - z", cm_dev, 1e-9, cm_dev < 1e-9});
  out << "n=" << o.n << " dim=" << o.dim << " d_z=" << o.dz << " sigma=" << num(o.sigma)
      << " seed=" << o.seed << "\n";
  out << std::left << std::setw(28) << "check" << std::setw(16) << "max_dev" << std::setw(16)
      << "band"
      << "result\n";
  bool ok = true;
  for (const auto& r : rows) {
    out << std::left << std::setw(28) << r.name << std::setw(16) << num(r.max_deviation)
        << std::setw(16) << num(r.band) << (r.pass ? "PASS" : "FAIL") << "\n";
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}

int sweep(const Options& o, std::ostream& out) {
  require(o.checkpoint, "--checkpoint");
  require(o.dataset, "--dataset");
  const auto ae = autoencoder::Autoencoder::load(fs::path(o.checkpoint) / "ae");
  const auto d = diffusion::MlpDenoiser::load(fs::path(o.checkpoint) / "denoiser");
  const auto ref = dataset::read_jsonl(o.dataset);
  const auto labels = pipeline::labels_of(ref, o.n);
  const auto& wz = o.sweep_wz.empty() ? o.wz : o.sweep_wz;
  std::ostringstream csv;
  const std::vector<std::string> cols{"fd_framing", "fd_human", "fd_camera", "precision",
                                      "recall",     "density",  "coverage",  "out_rate"};
  csv << "w_c,w_z";
  for (const auto& c : cols) csv << "," << c;
  csv << "\n";
  for (double wc : o.wc)
    for (double z : wz) {
      const auto gen = pipeline::generate(ae, d, labels, generate_config(o, {wc, z}));
      const auto rep = pipeline::evaluate(gen, ref);
      csv << num(wc) << "," << num(z);
      for (const auto& c : cols) csv << "," << num(rep.at(c));
      csv << "\n";
    }
  out << csv.str();
  if (!o.out.empty()) {
    std::ofstream f(o.out, std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + o.out);
    f << csv.str();
  }
  return 0;
}

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::UsageError:
      return 2;
    case ErrorCode::IoError:
    case ErrorCode::ParseError:
      return 3;
    case ErrorCode::ConfigError:
      return 4;
    default:
      return 5;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Auxiliary-guided joint human/camera motion generation toolkit", "auxguide"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* s) {
    s->add_option("--seed", o.seed, "Root random seed");
    s->add_option("--config", o.config, "JSON file of option values; flags override it");
  };
  auto sampling = [&](CLI::App* s) {
    s->add_option("--steps", o.steps, "DDPM sampling steps")->capture_default_str();
    s->add_option("--frames", o.frames, "Frames per sample")->capture_default_str();
    s->add_option("--fps", o.fps, "Frame rate")->capture_default_str();
    s->add_option("--n", o.n, "Number of samples");
    s->add_option("--checkpoint", o.checkpoint, "Checkpoint directory (holds ae/ and denoiser/)");
  };

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic paired dataset");
  common(gen);
  gen->add_option("--n", o.n, "Number of records");
  gen->add_option("--frames", o.frames, "Frames per record")->capture_default_str();
  gen->add_option("--fps", o.fps, "Frame rate")->capture_default_str();
  gen->add_option("--noise", o.noise, "Joint jitter scale (metres)");
  gen->add_option("--out", o.out, "Output JSON-lines file");

  auto training = [&](CLI::App* s) {
    common(s);
    s->add_option("--dataset", o.dataset, "Training dataset (JSON lines)");
    s->add_option("--checkpoint", o.checkpoint, "Checkpoint directory");
    s->add_option("--iters", o.iters, "Optimizer steps");
    s->add_option("--batch", o.batch, "Batch size");
    s->add_option("--lr", o.lr, "Adam learning rate");
    s->add_option("--warmup", o.warmup, "Linear warmup steps");
    s->add_option("--decay-after", o.decay_after, "Steps before the 0.1 learning-rate decay");
    s->add_option("--hidden", o.hidden, "Hidden width")->capture_default_str();
    s->add_flag("--linear", o.linear, "Drop the ReLU activations");
    s->add_flag("--grad-check", o.grad_check, "Finite-difference gradient check after training");
    s->add_option("--grad-eps", o.grad_eps, "Finite-difference step")->capture_default_str();
  };
  auto* tae = app.add_subcommand("train-ae", "Train the autoencoder");
  training(tae);
  auto* tdn = app.add_subcommand("train-denoiser", "Train the latent denoiser");
  training(tdn);
  tdn->add_option("--dropout", o.dropout, "Condition dropout probability")->capture_default_str();

  auto* smp = app.add_subcommand("sample", "Sample sequences with guidance");
  common(smp);
  sampling(smp);
  smp->add_option("--dataset", o.dataset, "Dataset whose labels condition the samples");
  smp->add_option("--wc", o.wc, "Condition guidance weight")->delimiter(',');
  smp->add_option("--wz", o.wz, "Auxiliary guidance weight")->delimiter(',');
  smp->add_option("--out", o.out, "Output JSON-lines file");

  auto* ev = app.add_subcommand("eval", "Compare generated samples with a reference set");
  common(ev);
  ev->add_option("--dataset", o.dataset, "Reference dataset");
  ev->add_option("--samples", o.samples, "Generated samples");
  ev->add_option("--out", o.out, "Report prefix (writes PREFIX.csv and PREFIX.json)");

  auto* vl = app.add_subcommand("verify-lemma", "Monte Carlo check of the projection lemma");
  common(vl);
  vl->add_option("--n", o.n, "Monte Carlo samples");
  vl->add_option("--dim", o.dim, "Latent dimension")->capture_default_str();
  vl->add_option("--dz", o.dz, "Framing dimension")->capture_default_str();
  vl->add_option("--sigma", o.sigma, "Standard deviation")->capture_default_str();

  auto* sw = app.add_subcommand("sweep", "Grid over guidance weights");
  common(sw);
  sampling(sw);
  sw->add_option("--dataset", o.dataset, "Reference dataset (also supplies labels)");
  sw->add_option("--wc", o.wc, "Condition guidance weights")->delimiter(',');
  sw->add_option("--wz", o.wz, "Auxiliary guidance weights")->delimiter(',');
  sw->add_option("--sweep-wz", o.sweep_wz, "Alias of --wz")->delimiter(',');
  sw->add_option("--out", o.out, "Output CSV file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << "error: " << e.what() << "\n" << sub->help();
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  // Per-command defaults for shared fields, applied before the config file.
  auto fill = [&](const std::string& flag, auto& field, auto value) {
    if (sub->get_option_no_throw(flag) && sub->get_option(flag)->count() == 0) field = value;
  };
  if (name == "gen-data") fill("--n", o.n, std::size_t{512});
  if (name == "train-ae") {
    fill("--iters", o.iters, std::size_t{2000});
    fill("--batch", o.batch, std::size_t{128});
    fill("--lr", o.lr, 1.9e-4);
    fill("--warmup", o.warmup, std::size_t{1000});
    fill("--decay-after", o.decay_after, std::size_t{4000});
  }
  if (name == "train-denoiser") {
    fill("--iters", o.iters, std::size_t{3000});
    fill("--batch", o.batch, std::size_t{128});
    fill("--lr", o.lr, 3e-4);
    fill("--warmup", o.warmup, std::size_t{2000});
    fill("--decay-after", o.decay_after, std::size_t{50000});
  }
  if (name == "sample" || name == "sweep") fill("--n", o.n, std::size_t{64});
  if (name == "sweep") fill("--wz", o.wz, std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  if (name == "verify-lemma") fill("--n", o.n, std::size_t{100000});

  try {
    if (!o.config.empty()) apply_config(sub, o.config);
    if (name == "gen-data") return gen_data(o, out);
    if (name == "train-ae") return train_ae(o, out, err);
    if (name == "train-denoiser") return train_denoiser(o, out, err);
    if (name == "sample") return sample(o, out);
    if (name == "eval") return eval(o, out);
    if (name == "verify-lemma") return verify_lemma(o, out);
    if (name == "sweep") return sweep(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (e.code() == ErrorCode::UsageError) err << sub->help();
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 5;
  }
  return 2;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace auxguide::cli
