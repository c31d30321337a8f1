#ifndef JETPAT_HARNESS_HPP
#define JETPAT_HARNESS_HPP

// Experiment harness: image standardization, AWGN injection, stratified k-fold
// cross-validation, dataset ingestion, synthetic textures and the evaluation loop.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "jetpat/classify.hpp"
#include "jetpat/encoder.hpp"
#include "jetpat/image.hpp"
#include "jetpat/image_io.hpp"
#include "jetpat/kernels.hpp"
#include "jetpat/serialize.hpp"

namespace jetpat {

inline constexpr double kStandardMean = 128.0;
inline constexpr double kStandardDeviation = 20.0;

/// Error carrying the offending data file.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Randomness

/// SplitMix64 finalizer; used to derive independent child seeds from one root seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_tag(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : tag) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ull;
  return h;
}

/// Child seed for stream (tag, index) of `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                    std::uint64_t index = 0) noexcept {
  return splitmix64(splitmix64(seed ^ hash_tag(tag)) + index);
}

// ---------------------------------------------------------------------------
// Image preprocessing

struct ImageStats {
  double mean;
  double variance;  // population
};

inline ImageStats image_stats(const GrayImage& img) {
  if (img.empty()) throw std::invalid_argument("image_stats: empty image");
  const auto px = img.pixels();
  const double n = static_cast<double>(px.size());
  const double mean = std::accumulate(px.begin(), px.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : px) ss += (v - mean) * (v - mean);
  return {mean, ss / n};
}

/// Affine rescale to mean 128 and standard deviation 20. Constant images become 128.
inline GrayImage standardize(const GrayImage& img) {
  const auto [mean, var] = image_stats(img);
  GrayImage out(img.width(), img.height(), kStandardMean);
  if (var <= 0.0) return out;
  const double gain = kStandardDeviation / std::sqrt(var);
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = kStandardMean + gain * (src[i] - mean);
  return out;
}

/// Adds i.i.d. zero-mean Gaussian noise with variance Var(image) / 10^(snr_db / 10).
inline GrayImage add_awgn(const GrayImage& img, double snr_db, std::uint64_t seed) {
  if (!std::isfinite(snr_db)) throw std::invalid_argument("add_awgn: SNR must be finite");
  const double noise_sd = std::sqrt(image_stats(img).variance / std::pow(10.0, snr_db / 10.0));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  GrayImage out = img;
  for (double& v : out.pixels()) v += noise_sd * noise(rng);
  return out;
}

// ---------------------------------------------------------------------------
// Datasets

enum class DatasetLayout { class_directories, outex_suite, synthetic };

inline std::string_view to_string(DatasetLayout l) {
  switch (l) {
    case DatasetLayout::class_directories: return "class-per-directory";
    case DatasetLayout::outex_suite: return "outex-suite";
    case DatasetLayout::synthetic: return "synthetic";
  }
  return "unknown";
}

struct Sample {
  std::string path;  // relative to the dataset root
  ClassId label = 0;
  std::optional<GrayImage> image;  // in-memory datasets only
};

/// Predefined train/test partition (Outex problem files).
struct SuiteSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct Dataset {
  std::filesystem::path root;
  std::string source;  // identity used to key feature caches
  DatasetLayout layout = DatasetLayout::class_directories;
  std::vector<std::string> class_names;
  std::vector<Sample> samples;
  std::optional<SuiteSplit> split;

  std::size_t class_count() const noexcept { return class_names.size(); }
  std::vector<ClassId> labels() const {
    std::vector<ClassId> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.label);
    return out;
  }
  GrayImage load(std::size_t i) const {
    const Sample& s = samples.at(i);
    if (s.image) return *s.image;
    try {
      return read_image((root / s.path).string());
    } catch (const std::exception& e) {
      throw DataError(e.what());
    }
  }
};

inline bool is_image_file(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm" || ext == ".ppm" || ext == ".pnm" || ext == ".png";
}

/// Every subdirectory of `root` is a class; its image files are the samples. Classes and
/// files are taken in lexicographic order so labels are stable.
inline Dataset load_class_directories(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw DataError("dataset root '" + root.string() + "' is not a directory");
  Dataset ds;
  ds.root = root;
  ds.source = fs::absolute(root).lexically_normal().string();
  ds.layout = DatasetLayout::class_directories;
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
    if (files.empty()) continue;
    std::sort(files.begin(), files.end());
    const auto label = static_cast<ClassId>(ds.class_names.size());
    ds.class_names.push_back(dir.filename().string());
    for (const auto& f : files)
      ds.samples.push_back({fs::relative(f, root).generic_string(), label, std::nullopt});
  }
  if (ds.class_names.size() < 2)
    throw DataError("dataset '" + root.string() + "' needs at least 2 class directories with images");
  return ds;
}

namespace detail {

inline std::vector<std::pair<std::string, int>> read_outex_list(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw DataError("cannot read '" + file.string() + "'");
  std::size_t count = 0;
  if (!(is >> count)) throw DataError("'" + file.string() + "': missing entry count");
  std::vector<std::pair<std::string, int>> out(count);
  for (auto& [name, id] : out)
    if (!(is >> name >> id)) throw DataError("'" + file.string() + "': truncated entry list");
  return out;
}

// Outex ships Sun raster images; a converted sibling with a readable extension is used.
inline std::string outex_image_path(const std::filesystem::path& root, const std::string& name) {
  namespace fs = std::filesystem;
  const fs::path rel = fs::path("images") / name;
  if (is_image_file(rel) && fs::exists(root / rel)) return rel.generic_string();
  for (const char* ext : {".png", ".pgm", ".ppm"}) {
    fs::path alt = rel;
    alt.replace_extension(ext);
    if (fs::exists(root / alt)) return alt.generic_string();
  }
  throw DataError("Outex image '" + (root / rel).string() +
                  "' not found in a readable format (convert .ras/.bmp to PNG or PGM)");
}

}  // namespace detail

/// Outex test suite: `<root>/<problem>/{classes,train,test}.txt` plus `<root>/images/`.
inline Dataset load_outex_suite(const std::filesystem::path& root, const std::string& problem = "000") {
  const auto dir = root / problem;
  Dataset ds;
  ds.root = root;
  ds.source = std::filesystem::absolute(root).lexically_normal().string() + "#" + problem;
  ds.layout = DatasetLayout::outex_suite;

  std::map<int, std::string> names;
  const auto classes_file = std::filesystem::exists(dir / "classes.txt") ? dir / "classes.txt"
                                                                          : root / "classes.txt";
  if (std::filesystem::exists(classes_file))
    for (const auto& [name, id] : detail::read_outex_list(classes_file)) names[id] = name;

  std::map<int, ClassId> label_of;
  auto label_for = [&](int id) {
    auto it = label_of.find(id);
    if (it != label_of.end()) return it->second;
    return label_of[id] = -1;
  };
  const auto train = detail::read_outex_list(dir / "train.txt");
  const auto test = detail::read_outex_list(dir / "test.txt");
  for (const auto* list : {&train, &test})
    for (const auto& entry : *list) label_for(entry.second);
  for (auto& [id, label] : label_of) {
    label = static_cast<ClassId>(ds.class_names.size());
    ds.class_names.push_back(names.count(id) ? names[id] : std::to_string(id));
  }

  SuiteSplit split;
  std::map<std::string, std::size_t> index_of;
  auto add = [&](const std::pair<std::string, int>& e) {
    auto [it, inserted] = index_of.try_emplace(e.first, ds.samples.size());
    if (inserted)
      ds.samples.push_back({detail::outex_image_path(root, e.first), label_of.at(e.second), std::nullopt});
    return it->second;
  };
  for (const auto& e : train) split.train.push_back(add(e));
  for (const auto& e : test) split.test.push_back(add(e));
  ds.split = std::move(split);
  if (ds.class_names.size() < 2) throw DataError("Outex suite '" + dir.string() + "' has fewer than 2 classes");
  return ds;
}

/// Outex suite when `<root>/000/train.txt` exists, otherwise directory-per-class.
inline Dataset load_dataset(const std::filesystem::path& root) {
  if (std::filesystem::exists(root / "000" / "train.txt")) return load_outex_suite(root);
  return load_class_directories(root);
}

// ---------------------------------------------------------------------------
// Stratified k-fold

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Each class is shuffled and dealt round-robin into k test folds; the starting fold
/// rotates between classes so overall fold sizes stay balanced.
inline std::vector<Fold> stratified_kfold(std::span<const ClassId> labels, int k, std::uint64_t seed,
                                          std::span<const std::string> class_names = {}) {
  if (k < 2) throw std::invalid_argument("stratified_kfold: k must be >= 2, got " + std::to_string(k));
  std::map<ClassId, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& [label, members] : by_class) {
    if (members.size() < static_cast<std::size_t>(k)) {
      const std::string name = static_cast<std::size_t>(label) < class_names.size()
                                   ? class_names[static_cast<std::size_t>(label)]
                                   : std::to_string(label);
      throw std::invalid_argument("stratified_kfold: class '" + name + "' has " +
                                  std::to_string(members.size()) + " samples, fewer than k = " +
                                  std::to_string(k));
    }
  }

  std::vector<std::vector<std::size_t>> test(static_cast<std::size_t>(k));
  std::size_t start = 0;
  for (auto& [label, members] : by_class) {
    std::mt19937_64 rng(derive_seed(seed, "fold-class", static_cast<std::uint64_t>(label)));
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t j = 0; j < members.size(); ++j) test[(start + j) % k].push_back(members[j]);
    start = (start + members.size()) % k;
  }

  std::vector<Fold> folds(static_cast<std::size_t>(k));
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::sort(test[f].begin(), test[f].end());
    folds[f].test = test[f];
    std::vector<char> in_test(labels.size(), 0);
    for (std::size_t i : test[f]) in_test[i] = 1;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (!in_test[i]) folds[f].train.push_back(i);
  }
  return folds;
}

// ---------------------------------------------------------------------------
// Synthetic textures

struct SynthSpec {
  int classes = 6;
  int samples_per_class = 20;
  int size = 64;
  std::vector<double> rotations_deg{0.0};
  double brightness_jitter = 0.0;
  std::uint64_t seed = 42;
};

enum class TextureFamily { grating, checkerboard, filtered_noise };

/// Procedural texture class description.
struct TextureClass {
  TextureFamily family;
  double scale;        // grating period, checker period or noise blur sigma (pixels)
  double orientation;  // radians, gratings only
  std::string name;
};

/// Class catalogue: the first six are fixed, later classes cycle the families with
/// geometrically stretched scales.
inline TextureClass texture_class(int c) {
  static const TextureClass base[] = {
      {TextureFamily::grating, 8.0, 0.0, "grating-p8"},
      {TextureFamily::grating, 4.0, 0.0, "grating-p4"},
      {TextureFamily::checkerboard, 8.0, 0.0, "checker-p8"},
      {TextureFamily::checkerboard, 16.0, 0.0, "checker-p16"},
      {TextureFamily::filtered_noise, 1.0, 0.0, "noise-s1"},
      {TextureFamily::filtered_noise, 2.5, 0.0, "noise-s2.5"},
  };
  if (c < 6) return base[c];
  TextureClass t = base[c % 6];
  const double stretch = std::pow(1.35, c / 6);
  t.scale *= stretch;
  t.orientation = 0.3 * (c / 6);
  std::ostringstream name;
  name << t.name << "-x" << c / 6;
  t.name = name.str();
  return t;
}

namespace detail {

// Unit-variance smoothed white noise on a square grid, sampled bilinearly with clamping.
struct NoiseField {
  GrayImage field;
  double sample(double x, double y) const {
    const double cx = (static_cast<double>(field.width()) - 1.0) / 2.0;
    x = std::clamp(x + cx, 0.0, static_cast<double>(field.width()) - 1.0);
    y = std::clamp(y + cx, 0.0, static_cast<double>(field.height()) - 1.0);
    return sample_neighbor(field, 0, 0, {x, y});
  }
};

inline NoiseField make_noise_field(int side, double blur_sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  GrayImage raw(static_cast<std::size_t>(side), static_cast<std::size_t>(side));
  for (double& v : raw.pixels()) v = normal(rng);
  const auto blurred = compute_jet(raw, blur_sigma, default_support_radius(blur_sigma)).channels[0];
  const auto stats = image_stats(blurred);
  GrayImage out(blurred.width(), blurred.height());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.pixels()[i] = (blurred.pixels()[i] - stats.mean) / std::sqrt(stats.variance);
  return {std::move(out)};
}

}  // namespace detail

inline constexpr double kSynthBackground = 128.0;
inline constexpr double kSynthAmplitude = 60.0;

/// Renders one sample of texture class `c`, rotated by `rotation_rad` about the image
/// center and shifted by `brightness`.
inline GrayImage render_texture(const TextureClass& t, int size, double rotation_rad,
                                double brightness, const detail::NoiseField* noise = nullptr) {
  GrayImage img(static_cast<std::size_t>(size), static_cast<std::size_t>(size));
  const double c0 = (size - 1) / 2.0;
  const double cr = std::cos(rotation_rad), sr = std::sin(rotation_rad);
  const double co = std::cos(t.orientation), so = std::sin(t.orientation);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double u = x - c0, v = y - c0;
      // texture coordinates: inverse rotation of the pixel position
      const double tu = cr * u + sr * v;
      const double tv = -sr * u + cr * v;
      double value = 0.0;
      switch (t.family) {
        case TextureFamily::grating: {
          const double along = co * tu + so * tv;
          value = std::sin(2.0 * std::numbers::pi * along / t.scale);
          break;
        }
        case TextureFamily::checkerboard: {
          const double w = 2.0 * std::numbers::pi / t.scale;
          value = std::tanh(3.0 * std::sin(w * tu) * std::sin(w * tv)) / std::tanh(3.0);
          break;
        }
        case TextureFamily::filtered_noise:
          value = noise ? noise->sample(tu, tv) : 0.0;
          break;
      }
      img(x, y) = kSynthBackground + kSynthAmplitude * value + brightness;
    }
  }
  return img;
}

/// Procedural dataset: per sample, a rotation drawn from `rotations_deg` and a uniform
/// brightness offset in [-jitter, jitter]. Deterministic in `seed`.
inline Dataset generate_synthetic(const SynthSpec& spec) {
  if (spec.classes < 2) throw std::invalid_argument("generate_synthetic: need at least 2 classes");
  if (spec.size < 8) throw std::invalid_argument("generate_synthetic: image size must be >= 8");
  if (spec.samples_per_class < 1) throw std::invalid_argument("generate_synthetic: need >= 1 sample per class");
  if (spec.rotations_deg.empty()) throw std::invalid_argument("generate_synthetic: empty rotation set");

  Dataset ds;
  ds.layout = DatasetLayout::synthetic;
  std::ostringstream src;
  src << "synthetic:c" << spec.classes << ":n" << spec.samples_per_class << ":s" << spec.size
      << ":j" << spec.brightness_jitter << ":seed" << spec.seed << ":r";
  for (double r : spec.rotations_deg) src << r << ',';
  ds.source = src.str();

  const int field_side = static_cast<int>(std::ceil(spec.size * std::numbers::sqrt2)) + 8;
  for (int c = 0; c < spec.classes; ++c) {
    const TextureClass t = texture_class(c);
    ds.class_names.push_back(t.name);
    std::optional<detail::NoiseField> noise;
    if (t.family == TextureFamily::filtered_noise)
      noise = detail::make_noise_field(field_side, t.scale,
                                       derive_seed(spec.seed, "noise-field", static_cast<std::uint64_t>(c)));
    std::mt19937_64 rng(derive_seed(spec.seed, "synth-class", static_cast<std::uint64_t>(c)));
    std::uniform_int_distribution<std::size_t> pick(0, spec.rotations_deg.size() - 1);
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    for (int s = 0; s < spec.samples_per_class; ++s) {
      const double angle = spec.rotations_deg[pick(rng)] * std::numbers::pi / 180.0;
      const double offset = spec.brightness_jitter * jitter(rng);
      std::ostringstream path;
      path << t.name << '/' << "sample_" << (s < 10 ? "00" : s < 100 ? "0" : "") << s << ".pgm";
      ds.samples.push_back({path.str(), c,
                            render_texture(t, spec.size, angle, offset, noise ? &*noise : nullptr)});
    }
  }
  return ds;
}

/// Writes an in-memory dataset as class-per-directory 8-bit PGM files under `dir`.
inline void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto path = dir / ds.samples[i].path;
    std::filesystem::create_directories(path.parent_path());
    write_pgm(path.string(), ds.load(i));
  }
}

// ---------------------------------------------------------------------------
// Experiments

enum class Classifier { nnc, nsc };
enum class Descriptor { ljp, lbp };
enum class Protocol { kfold, suite };

inline std::string_view to_string(Classifier c) { return c == Classifier::nnc ? "nnc" : "nsc"; }
inline std::string_view to_string(Descriptor d) { return d == Descriptor::ljp ? "ljp" : "lbp"; }
inline std::string_view to_string(Protocol p) {
  return p == Protocol::kfold ? "stratified-kfold" : "suite-split";
}

struct ExperimentConfig {
  FeatureConfig feature;
  Descriptor descriptor = Descriptor::ljp;
  Classifier classifier = Classifier::nsc;
  Protocol protocol = Protocol::kfold;
  int k = 10;
  std::uint64_t seed = 42;
  std::optional<double> snr_db;
  SubspaceRule nsc_dim = SubspaceRule::energy(0.99);
  unsigned threads = 0;  // 0 = hardware concurrency
  std::optional<std::filesystem::path> cache_dir;

  void validate() const {
    if (k < 2) throw std::invalid_argument("k must be >= 2, got " + std::to_string(k));
    if (snr_db && !std::isfinite(*snr_db)) throw std::invalid_argument("snr_db must be finite");
    if (!(feature.sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
    if (!(feature.radius > 0.0)) throw std::invalid_argument("radius must be > 0");
    if (feature.neighbors < 1 || feature.neighbors > 24)
      throw std::invalid_argument("neighbors must be in [1, 24]");
  }
};

struct ExperimentReport {
  ExperimentConfig config;
  std::string dataset_source;
  std::string dataset_layout;
  std::vector<std::string> class_names;
  std::size_t sample_count = 0;
  std::size_t feature_length = 0;
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // sample standard deviation over folds
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  double extraction_seconds_per_image = 0.0;
  double matching_seconds_per_query = 0.0;
  std::size_t cache_hits = 0;
};

struct MeanStd {
  double mean;
  double std;
};

/// Mean and sample standard deviation (n - 1 denominator; 0 for a single value).
inline MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

/// Runs `fn(i)` for i in [0, n) on up to `threads` workers (0 = hardware concurrency).
/// The first exception thrown by any worker is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t)
      workers.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = n;
          }
        }
      });
  }
  if (error) std::rethrow_exception(error);
}

/// Image after standardization and, when configured, noise injection.
inline GrayImage prepare_image(const Dataset& ds, std::size_t i, const ExperimentConfig& cfg) {
  GrayImage img = standardize(ds.load(i));
  if (cfg.snr_db) img = add_awgn(img, *cfg.snr_db, derive_seed(cfg.seed, "awgn", i));
  return img;
}

inline FeatureVector describe(const GrayImage& img, const ExperimentConfig& cfg) {
  return cfg.descriptor == Descriptor::ljp ? extract_feature(img, cfg.feature)
                                           : extract_lbp_feature(img, cfg.feature);
}

/// Cache file for (dataset, descriptor, feature config, noise setting).
inline std::filesystem::path cache_file(const Dataset& ds, const ExperimentConfig& cfg) {
  std::ostringstream tag;
  tag << ds.source << '|' << to_string(cfg.descriptor) << '|';
  if (cfg.snr_db) tag << "snr" << std::bit_cast<std::uint64_t>(*cfg.snr_db) << "|seed" << cfg.seed;
  std::ostringstream name;
  name << "features-" << std::hex << config_fingerprint(cfg.feature) << '-' << hash_tag(tag.str())
       << ".jpfc";
  return *cfg.cache_dir / name.str();
}

struct FeatureSet {
  std::vector<std::vector<double>> vectors;
  double extraction_seconds = 0.0;  // summed over freshly computed images
  std::size_t computed = 0;
  std::size_t cache_hits = 0;
};

/// Features for every sample, read from / written to the feature cache when configured.
inline FeatureSet compute_features(const Dataset& ds, const ExperimentConfig& cfg) {
  const std::uint64_t fingerprint = config_fingerprint(cfg.feature);
  FeatureSet out;
  out.vectors.resize(ds.samples.size());
  std::vector<char> have(ds.samples.size(), 0);

  std::filesystem::path cache;
  if (cfg.cache_dir) {
    cache = cache_file(ds, cfg);
    if (std::filesystem::exists(cache)) {
      std::map<std::string, std::size_t> index;
      for (std::size_t i = 0; i < ds.samples.size(); ++i) index[ds.samples[i].path] = i;
      for (auto& rec : load_feature_cache(cache.string())) {
        auto it = index.find(rec.path);
        if (it == index.end() || rec.fingerprint != fingerprint ||
            rec.label != ds.samples[it->second].label)
          continue;
        out.vectors[it->second] = std::move(rec.values);
        have[it->second] = 1;
        ++out.cache_hits;
      }
    }
  }

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    if (!have[i]) todo.push_back(i);
  std::vector<double> seconds(todo.size(), 0.0);
  parallel_for(todo.size(), cfg.threads, [&](std::size_t t) {
    const std::size_t i = todo[t];
    try {
      const GrayImage img = prepare_image(ds, i, cfg);
      const auto t0 = std::chrono::steady_clock::now();
      out.vectors[i] = describe(img, cfg).values;
      seconds[t] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } catch (const DataError&) {
      throw;
    } catch (const std::exception& e) {
      throw DataError(ds.samples[i].path + ": " + e.what());
    }
  });
  out.computed = todo.size();
  out.extraction_seconds = std::accumulate(seconds.begin(), seconds.end(), 0.0);

  if (cfg.cache_dir && !todo.empty()) {
    std::vector<CacheRecord> records;
    records.reserve(ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i)
      records.push_back({ds.samples[i].path, ds.samples[i].label, fingerprint, out.vectors[i]});
    std::filesystem::create_directories(*cfg.cache_dir);
    const auto tmp = cache.string() + ".tmp";
    save_feature_cache(tmp, records);
    std::filesystem::rename(tmp, cache);
  }
  return out;
}

/// Predicted labels for `test`, trained on `train`. Accumulates matching time.
inline std::vector<ClassId> classify_fold(const FeatureSet& features, std::span<const ClassId> labels,
                                          const Fold& fold, const ExperimentConfig& cfg,
                                          double& matching_seconds) {
  const bool nsc = cfg.classifier == Classifier::nsc;
  std::vector<LabeledFeature> train;
  train.reserve(fold.train.size());
  for (std::size_t i : fold.train)
    train.push_back({nsc ? sqrt_preprocess(features.vectors[i]) : features.vectors[i], labels[i]});
  std::vector<ClassModel> models;
  if (nsc) models = fit_nsc(train, cfg.nsc_dim);

  std::vector<ClassId> predicted;
  predicted.reserve(fold.test.size());
  for (std::size_t i : fold.test) {
    const auto t0 = std::chrono::steady_clock::now();
    predicted.push_back(nsc ? nsc_predict(models, sqrt_preprocess(features.vectors[i]))
                            : nnc_predict(train, features.vectors[i]));
    matching_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return predicted;
}

/// standardize -> optional AWGN -> features (cached) -> per-fold fit/predict -> report.
inline ExperimentReport run_experiment(const Dataset& ds, const ExperimentConfig& cfg) {
  cfg.validate();
  const auto labels = ds.labels();
  std::vector<Fold> folds;
  if (cfg.protocol == Protocol::suite) {
    if (!ds.split) throw std::invalid_argument("suite protocol requires a dataset with a predefined split");
    folds.push_back({ds.split->train, ds.split->test});
  } else {
    folds = stratified_kfold(labels, cfg.k, derive_seed(cfg.seed, "folds"), ds.class_names);
  }

  const FeatureSet features = compute_features(ds, cfg);

  ExperimentReport report;
  report.config = cfg;
  report.dataset_source = ds.source;
  report.dataset_layout = std::string(to_string(ds.layout));
  report.class_names = ds.class_names;
  report.sample_count = ds.samples.size();
  report.feature_length = features.vectors.empty() ? 0 : features.vectors.front().size();
  report.cache_hits = features.cache_hits;
  report.confusion.assign(ds.class_count(), std::vector<std::size_t>(ds.class_count(), 0));

  double matching_seconds = 0.0;
  std::size_t queries = 0;
  for (const auto& fold : folds) {
    const auto predicted = classify_fold(features, labels, fold, cfg, matching_seconds);
    std::size_t correct = 0;
    for (std::size_t q = 0; q < fold.test.size(); ++q) {
      const ClassId truth = labels[fold.test[q]];
      correct += predicted[q] == truth;
      ++report.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted[q])];
    }
    queries += fold.test.size();
    report.fold_accuracies.push_back(fold.test.empty() ? 0.0
                                                       : static_cast<double>(correct) /
                                                             static_cast<double>(fold.test.size()));
  }
  const auto [mean, sd] = mean_std(report.fold_accuracies);
  report.mean_accuracy = mean;
  report.std_accuracy = sd;
  report.extraction_seconds_per_image =
      features.computed ? features.extraction_seconds / static_cast<double>(features.computed) : 0.0;
  report.matching_seconds_per_query = queries ? matching_seconds / static_cast<double>(queries) : 0.0;
  return report;
}

}  // namespace jetpat

#endif  // JETPAT_HARNESS_HPP
