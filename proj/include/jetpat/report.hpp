#ifndef JETPAT_REPORT_HPP
#define JETPAT_REPORT_HPP

#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>

#include <json.hpp>

#include "jetpat/harness.hpp"

namespace jetpat {

inline std::string to_string(const SubspaceRule& rule) {
  std::ostringstream os;
  if (const auto* f = std::get_if<SubspaceRule::Fixed>(&rule.rule))
    os << f->dim;
  else
    os << std::get<SubspaceRule::Energy>(rule.rule).fraction;
  return os.str();
}

inline nlohmann::ordered_json config_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["descriptor"] = to_string(cfg.descriptor);
  j["sigma"] = cfg.feature.sigma;
  j["support_radius"] = cfg.feature.resolved_support_radius();
  j["radius"] = cfg.feature.radius;
  j["neighbors"] = cfg.feature.neighbors;
  j["include_zeroth"] = cfg.feature.include_zeroth;
  j["mapping"] = to_string(cfg.feature.mapping);
  j["interpolation"] = to_string(cfg.feature.interpolation);
  j["weber"] = cfg.feature.weber;
  j["classifier"] = to_string(cfg.classifier);
  j["nsc_dim"] = to_string(cfg.nsc_dim);
  j["protocol"] = to_string(cfg.protocol);
  j["k"] = cfg.k;
  j["seed"] = cfg.seed;
  if (cfg.snr_db)
    j["snr_db"] = *cfg.snr_db;
  else
    j["snr_db"] = nullptr;
  j["fingerprint"] = [&] {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << config_fingerprint(cfg.feature);
    return os.str();
  }();
  return j;
}

inline nlohmann::ordered_json report_json(const ExperimentReport& r, bool include_timing = true) {
  nlohmann::ordered_json j;
  j["config"] = config_json(r.config);
  j["dataset"] = {{"source", r.dataset_source},
                  {"layout", r.dataset_layout},
                  {"samples", r.sample_count},
                  {"classes", r.class_names}};
  j["notes"] = {
      "images standardized to mean 128, std 20 before feature extraction",
      "SNR signal power is the variance of the standardized image; noisy images are not re-standardized",
      r.config.protocol == Protocol::kfold ? "folds are stratified by class"
                                           : "train/test split taken from the suite definition"};
  j["feature_length"] = r.feature_length;
  j["fold_accuracies"] = r.fold_accuracies;
  j["mean_accuracy"] = r.mean_accuracy;
  j["std_accuracy"] = r.std_accuracy;
  j["confusion"] = r.confusion;
  if (include_timing) {
    j["timing"] = {{"extraction_seconds_per_image", r.extraction_seconds_per_image},
                   {"matching_seconds_per_query", r.matching_seconds_per_query},
                   {"cache_hits", r.cache_hits}};
  }
  return j;
}

inline void write_report_text(std::ostream& os, const ExperimentReport& r, bool include_timing = true) {
  const auto cfg = config_json(r.config);
  os << "experiment report\n";
  os << "  dataset        " << r.dataset_source << " (" << r.dataset_layout << ", " << r.sample_count
     << " samples, " << r.class_names.size() << " classes)\n";
  for (const auto& [key, value] : cfg.items())
    os << "  " << std::left << std::setw(15) << key << value.dump() << '\n';
  os << "  feature length " << r.feature_length << "\n\n";

  os << std::right << std::fixed << std::setprecision(2);
  os << "  fold  accuracy(%)\n";
  for (std::size_t f = 0; f < r.fold_accuracies.size(); ++f)
    os << "  " << std::setw(4) << f << "  " << std::setw(11) << 100.0 * r.fold_accuracies[f] << '\n';
  os << "  mean  " << std::setw(11) << 100.0 * r.mean_accuracy << "  +/- " << 100.0 * r.std_accuracy
     << "\n\n";

  os << "  confusion (rows = true class)\n";
  std::size_t name_width = 5;
  for (const auto& n : r.class_names) name_width = std::max(name_width, n.size());
  for (std::size_t i = 0; i < r.confusion.size(); ++i) {
    os << "  " << std::left << std::setw(static_cast<int>(name_width)) << r.class_names[i] << std::right;
    for (std::size_t c : r.confusion[i]) os << std::setw(5) << c;
    os << '\n';
  }
  if (include_timing) {
    os << std::setprecision(6) << "\n  extraction s/image  " << r.extraction_seconds_per_image
       << "\n  matching s/query    " << r.matching_seconds_per_query << "\n  cache hits          "
       << r.cache_hits << '\n';
  }
  os.unsetf(std::ios::floatfield);
}

}  // namespace jetpat

#endif  // JETPAT_REPORT_HPP
