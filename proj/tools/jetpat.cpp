// jetpat: command-line front end for local jet pattern texture features.
//
// Exit codes: 0 success, 1 usage error, 2 data/runtime error.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jetpat/jetpat.hpp"

namespace {

using namespace jetpat;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FeatureFlags {
  double sigma = 1.0;
  int support_radius = 0;
  double radius = 1.0;
  int neighbors = 8;
  bool include_zeroth = false;
  std::string mapping = "uniform";
  std::string interpolation = "bilinear";
  double weber = kWeberConstant;

  void add_to(CLI::App* app) {
    app->add_option("--sigma", sigma, "DtG scale in pixels")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--support-radius", support_radius, "Kernel half-width (0 = ceil(4 sigma))")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    app->add_option("--radius,-R", radius, "Sampling radius R")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--neighbors,-N", neighbors, "Neighbor count N")->capture_default_str()->check(CLI::Range(1, 24));
    app->add_flag("--include-zeroth", include_zeroth, "Keep the zeroth-order jet channel (default: off)");
    app->add_option("--mapping", mapping, "Code mapping")
        ->capture_default_str()
        ->check(CLI::IsMember({"uniform", "raw"}));
    app->add_option("--interp", interpolation, "Neighbor interpolation")
        ->capture_default_str()
        ->check(CLI::IsMember({"bilinear", "nearest"}));
    app->add_option("--weber", weber, "Contrast normalization constant")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }

  FeatureConfig resolve() const {
    FeatureConfig cfg;
    cfg.sigma = sigma;
    cfg.support_radius = support_radius;
    cfg.radius = radius;
    cfg.neighbors = neighbors;
    cfg.include_zeroth = include_zeroth;
    cfg.mapping = mapping == "raw" ? CodeMapping::raw : CodeMapping::uniform;
    cfg.interpolation = interpolation == "nearest" ? Interpolation::nearest : Interpolation::bilinear;
    cfg.weber = weber;
    return cfg;
  }
};

SubspaceRule parse_nsc_dim(const std::string& text) {
  try {
    std::size_t used = 0;
    if (text.find_first_of(".eE") != std::string::npos) {
      const double f = std::stod(text, &used);
      if (used == text.size() && f > 0.0 && f <= 1.0) return SubspaceRule::energy(f);
    } else {
      const long n = std::stol(text, &used);
      if (used == text.size() && n >= 1) return SubspaceRule::fixed(static_cast<std::size_t>(n));
    }
  } catch (const std::exception&) {
  }
  throw UsageError("--nsc-dim must be an integer >= 1 or an energy fraction in (0, 1], got '" + text + "'");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("cannot parse number '" + item + "' in list '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError("empty list '" + text + "'");
  return out;
}

void log_config(const FeatureConfig& cfg) {
  ExperimentConfig tmp;
  tmp.feature = cfg;
  auto j = config_json(tmp);
  nlohmann::ordered_json feature;
  for (const char* key : {"sigma", "support_radius", "radius", "neighbors", "include_zeroth", "mapping",
                          "interpolation", "weber", "fingerprint"})
    feature[key] = j[key];
  std::cerr << "config " << feature.dump() << '\n';
}

std::optional<std::filesystem::path> env_cache_dir() {
  if (const char* dir = std::getenv("JETPAT_CACHE_DIR"); dir && *dir) return std::filesystem::path(dir);
  return std::nullopt;
}

// ---------------------------------------------------------------------------

struct KernelDumpCmd {
  int m = 0, n = 0;
  double sigma = 1.0;
  int support_radius = 0;
  std::string out;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("kernel-dump", "Write a dense 2-D DtG kernel as CSV (row-major)");
    sub->add_option("--m", m, "x derivative order")->capture_default_str()->check(CLI::Range(0, 2));
    sub->add_option("--n", n, "y derivative order")->capture_default_str()->check(CLI::Range(0, 2));
    sub->add_option("--sigma", sigma, "DtG scale in pixels")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--support-radius", support_radius, "Kernel half-width (0 = ceil(4 sigma))")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--out", out, "Output file (default stdout)");
    sub->callback([this] { run(); });
  }

  void run() const {
    if (m + n > kMaxJetOrder) throw UsageError("--m + --n must be <= 2");
    const int r = support_radius > 0 ? support_radius : default_support_radius(sigma);
    const auto kernel = dtg_kernel_2d(m, n, sigma, r);
    if (out.empty()) {
      write_csv(std::cout, kernel.dense());
    } else {
      std::ofstream os(out);
      if (!os) throw std::runtime_error("cannot write '" + out + "'");
      write_csv(os, kernel.dense());
    }
  }
};

struct ExtractCmd {
  FeatureFlags flags;
  std::string image, data, cache_out, csv_out, dump_out, descriptor = "ljp";
  int dump_channel = -1;
  bool no_standardize = false;
  unsigned threads = 0;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("extract", "Extract features from one image or a dataset");
    auto* img = sub->add_option("--image", image, "Single input image (PGM/PPM/PNG)");
    auto* dat = sub->add_option("--data", data, "Dataset root (class-per-directory or Outex suite)");
    img->excludes(dat);
    sub->add_option("--descriptor", descriptor, "ljp or the plain lbp baseline")
        ->capture_default_str()
        ->check(CLI::IsMember({"ljp", "lbp"}));
    sub->add_option("--cache-out", cache_out, "Write a binary feature cache (dataset mode)");
    sub->add_option("--csv", csv_out, "Write the CSV export to this file (default stdout)");
    sub->add_option("--dump-channel", dump_channel, "Jet channel index 0-5 to dump (single image)")
        ->check(CLI::Range(0, kJetSize - 1));
    sub->add_option("--dump-out", dump_out, "Channel dump target: .pgm (16-bit) or CSV");
    sub->add_flag("--no-standardize", no_standardize, "Skip mean/std standardization (default: off)");
    sub->add_option("--threads", threads, "Worker threads (0 = auto)")->capture_default_str();
    flags.add_to(sub);
    sub->callback([this] { run(); });
  }

  void run() const {
    if (image.empty() == data.empty()) throw UsageError("extract needs exactly one of --image or --data");
    if ((dump_channel >= 0) != !dump_out.empty())
      throw UsageError("--dump-channel and --dump-out must be given together");
    const FeatureConfig cfg = flags.resolve();
    log_config(cfg);
    ExperimentConfig exp;
    exp.feature = cfg;
    exp.descriptor = descriptor == "lbp" ? Descriptor::lbp : Descriptor::ljp;
    exp.threads = threads;

    std::vector<CacheRecord> records;
    const std::uint64_t fp = config_fingerprint(cfg);
    if (!image.empty()) {
      GrayImage img = read_image(image);
      if (!no_standardize) img = standardize(img);
      if (dump_channel >= 0) {
        const auto jet = compute_jet(img, cfg.sigma, cfg.resolved_support_radius());
        dump_channel_file(jet.channels[dump_channel]);
      }
      records.push_back({image, 0, fp, describe(img, exp).values});
    } else {
      const Dataset ds = load_dataset(data);
      if (no_standardize) throw UsageError("--no-standardize applies to --image only");
      const auto features = compute_features(ds, exp);
      for (std::size_t i = 0; i < ds.samples.size(); ++i)
        records.push_back({ds.samples[i].path, ds.samples[i].label, fp, features.vectors[i]});
    }
    if (!cache_out.empty()) save_feature_cache(cache_out, records);
    if (!csv_out.empty()) {
      std::ofstream os(csv_out);
      if (!os) throw std::runtime_error("cannot write '" + csv_out + "'");
      write_feature_csv(os, records);
    } else if (cache_out.empty()) {
      write_feature_csv(std::cout, records);
    }
  }

  void dump_channel_file(const GrayImage& channel) const { jetpat::dump_channel(dump_out, channel); }
};

struct ExperimentCmd {
  FeatureFlags flags;
  std::string data, classifier = "nsc", descriptor = "ljp", protocol = "kfold", format = "json",
                    nsc_dim = "0.99";
  int k = 10;
  std::uint64_t seed = 42;
  std::optional<double> snr_db;
  bool no_timing = false;
  unsigned threads = 0;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("experiment", "Cross-validated classification experiment");
    sub->add_option("--data", data, "Dataset root (class-per-directory or Outex suite)")->required();
    sub->add_option("--classifier", classifier, "nsc or nnc")
        ->capture_default_str()
        ->check(CLI::IsMember({"nsc", "nnc"}));
    sub->add_option("--descriptor", descriptor, "ljp or the plain lbp baseline")
        ->capture_default_str()
        ->check(CLI::IsMember({"ljp", "lbp"}));
    sub->add_option("--protocol", protocol, "kfold or suite (predefined Outex split)")
        ->capture_default_str()
        ->check(CLI::IsMember({"kfold", "suite"}));
    sub->add_option("--k", k, "Number of folds")->capture_default_str()->check(CLI::Range(2, 1 << 20));
    sub->add_option("--seed", seed, "Root PRNG seed")->capture_default_str();
    sub->add_option("--snr-db", snr_db, "Inject AWGN at this SNR (dB)");
    sub->add_option("--nsc-dim", nsc_dim, "NSC subspace: integer dimension or energy fraction")
        ->capture_default_str();
    sub->add_option("--format", format, "Report format")->capture_default_str()->check(CLI::IsMember({"json", "text"}));
    sub->add_flag("--no-timing", no_timing, "Omit timing fields from the report (default: off)");
    sub->add_option("--threads", threads, "Worker threads (0 = auto)")->capture_default_str();
    flags.add_to(sub);
    sub->callback([this] { run(); });
  }

  void run() const {
    ExperimentConfig cfg;
    cfg.feature = flags.resolve();
    cfg.classifier = classifier == "nnc" ? Classifier::nnc : Classifier::nsc;
    cfg.descriptor = descriptor == "lbp" ? Descriptor::lbp : Descriptor::ljp;
    cfg.protocol = protocol == "suite" ? Protocol::suite : Protocol::kfold;
    cfg.k = k;
    cfg.seed = seed;
    if (snr_db && !std::isfinite(*snr_db)) throw UsageError("--snr-db must be finite");
    cfg.snr_db = snr_db;
    cfg.nsc_dim = parse_nsc_dim(nsc_dim);
    cfg.threads = threads;
    cfg.cache_dir = env_cache_dir();
    std::cerr << "config " << config_json(cfg).dump() << '\n';

    const Dataset ds = load_dataset(data);
    const auto report = run_experiment(ds, cfg);
    if (format == "text")
      write_report_text(std::cout, report, !no_timing);
    else
      std::cout << report_json(report, !no_timing).dump(2) << '\n';
  }
};

struct SynthCmd {
  std::string out;
  SynthSpec spec;
  std::string rotations = "0,15,30,45,60,75,90";

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("synth", "Write a procedural texture dataset (class-per-directory PGM)");
    sub->add_option("--out", out, "Output directory")->required();
    sub->add_option("--classes", spec.classes, "Number of classes")->capture_default_str()->check(CLI::Range(2, 1000));
    sub->add_option("--samples", spec.samples_per_class, "Samples per class")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--size", spec.size, "Image side in pixels")->capture_default_str()->check(CLI::Range(8, 8192));
    sub->add_option("--rotations", rotations, "Comma-separated rotation angles (degrees)")->capture_default_str();
    spec.brightness_jitter = 20.0;
    sub->add_option("--jitter", spec.brightness_jitter, "Brightness offset range +/-")->capture_default_str();
    sub->add_option("--seed", spec.seed, "PRNG seed")->capture_default_str();
    sub->callback([this] { run(); });
  }

  void run() {
    spec.rotations_deg = parse_list(rotations);
    const Dataset ds = generate_synthetic(spec);
    write_dataset(ds, out);
    std::cerr << "wrote " << ds.samples.size() << " images in " << ds.class_count() << " classes to " << out
              << '\n';
  }
};

struct BenchCmd {
  FeatureFlags flags;
  std::string sizes = "64,128,256,512";
  int repeats = 5;
  std::uint64_t seed = 42;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("bench", "Time feature extraction against image size");
    sub->add_option("--sizes", sizes, "Comma-separated square image sides")->capture_default_str();
    sub->add_option("--repeats", repeats, "Timed runs per size (minimum is reported)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "PRNG seed for the test images")->capture_default_str();
    flags.add_to(sub);
    sub->callback([this] { run(); });
  }

  void run() const {
    const FeatureConfig cfg = flags.resolve();
    log_config(cfg);
    std::vector<double> log_px, log_t;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (double side_d : parse_list(sizes)) {
      const auto side = static_cast<std::size_t>(side_d);
      GrayImage img(side, side);
      std::mt19937_64 rng(derive_seed(seed, "bench", side));
      std::uniform_real_distribution<double> u(0.0, 255.0);
      for (double& v : img.pixels()) v = u(rng);
      img = standardize(img);
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto f = extract_feature(img, cfg);
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        if (f.values.empty()) throw std::runtime_error("empty feature");
      }
      rows.push_back({{"side", side}, {"pixels", side * side}, {"seconds", best}});
      log_px.push_back(std::log(static_cast<double>(side * side)));
      log_t.push_back(std::log(best));
    }
    nlohmann::ordered_json j;
    j["runs"] = rows;
    if (log_px.size() >= 2) j["loglog_slope"] = loglog_slope(log_px, log_t);
    std::cout << j.dump(2) << '\n';
  }

  static double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
    return sxy / sxx;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local jet pattern texture features and classification experiments"};
  app.require_subcommand(1);
  KernelDumpCmd kernel_dump;
  ExtractCmd extract;
  ExperimentCmd experiment;
  SynthCmd synth;
  BenchCmd bench;
  kernel_dump.add(app);
  extract.add(app);
  experiment.add(app);
  synth.add(app);
  bench.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
