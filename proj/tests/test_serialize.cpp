#include <filesystem>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "jetpat/serialize.hpp"

using namespace jetpat;

namespace {

std::vector<CacheRecord> random_records(std::mt19937_64& rng, std::size_t count, std::size_t len) {
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  std::uniform_int_distribution<int> label(-5, 50);
  std::vector<CacheRecord> out;
  for (std::size_t i = 0; i < count; ++i) {
    CacheRecord r{"class_" + std::to_string(i % 3) + "/img " + std::to_string(i) + ".pgm", label(rng),
                  rng(), {}};
    for (std::size_t k = 0; k < len; ++k) r.values.push_back(u(rng));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

TEST(FeatureCache, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  for (std::size_t count : {0u, 1u, 7u}) {
    const auto records = random_records(rng, count, 295);
    std::stringstream ss;
    write_feature_cache(ss, records);
    EXPECT_EQ(read_feature_cache(ss), records);
  }
}

TEST(FeatureCache, LittleEndianLayout) {
  std::stringstream ss;
  write_feature_cache(ss, {{"ab", 3, 0x0102030405060708ull, {1.0}}});
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 4u + 4 + 4 + 2 + 4 + 8 + 4 + 8);
  EXPECT_EQ(bytes.substr(0, 4), "JPFC");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes.substr(12, 2), "ab");
  EXPECT_EQ(bytes[14], 3);
  EXPECT_EQ(bytes[18], 0x08);
  EXPECT_EQ(bytes[25], 0x01);
  // 1.0 = 0x3ff0000000000000
  EXPECT_EQ(static_cast<unsigned char>(bytes[36]), 0xf0u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[37]), 0x3fu);
}

TEST(FeatureCache, FileRoundTripAndErrors) {
  std::mt19937_64 rng(2);
  const auto records = random_records(rng, 4, 59);
  const auto path = std::filesystem::temp_directory_path() / "jetpat_test_cache.bin";
  save_feature_cache(path.string(), records);
  EXPECT_EQ(load_feature_cache(path.string()), records);
  std::filesystem::remove(path);
  EXPECT_THROW(load_feature_cache(path.string()), std::runtime_error);

  std::stringstream bad("XXXX\1\0\0\0");
  EXPECT_THROW(read_feature_cache(bad), std::runtime_error);

  std::stringstream ss;
  write_feature_cache(ss, records);
  std::stringstream truncated(ss.str().substr(0, ss.str().size() - 3));
  EXPECT_THROW(read_feature_cache(truncated), std::runtime_error);
}

TEST(FeatureCsv, HeaderAndRows) {
  std::stringstream ss;
  write_feature_csv(ss, {{"a.pgm", 2, 0, {0.5, 0.25, 0.25}}, {"b.pgm", 4, 0, {1.0, 0.0, 0.0}}});
  std::string header, row1, row2;
  std::getline(ss, header);
  std::getline(ss, row1);
  std::getline(ss, row2);
  EXPECT_EQ(header, "path,label,f0,f1,f2");
  EXPECT_EQ(row1, "a.pgm,2,0.5,0.25,0.25");
  EXPECT_EQ(row2, "b.pgm,4,1,0,0");
}

TEST(FeatureCsv, DefaultLengthHeaderEndsAtF294) {
  std::stringstream ss;
  write_feature_csv(ss, {{"x", 1, 0, std::vector<double>(295, 0.0)}});
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header.substr(0, 14), "path,label,f0,");
  EXPECT_EQ(header.substr(header.size() - 5), ",f294");
}

TEST(ModelFile, RoundTripIsBitExact) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 1);
  for (int t = 0; t < 10; ++t) {
    std::vector<ClassModel> models;
    for (int c = 0; c < 4; ++c) {
      ClassModel m{c * 3 - 1, Eigen::MatrixXd(17, 1 + c)};
      for (Eigen::Index i = 0; i < m.basis.size(); ++i) m.basis.data()[i] = n(rng);
      models.push_back(std::move(m));
    }
    std::stringstream ss;
    write_models(ss, models);
    const auto back = read_models(ss);
    ASSERT_EQ(back.size(), models.size());
    for (std::size_t c = 0; c < models.size(); ++c) {
      EXPECT_EQ(back[c].label, models[c].label);
      EXPECT_EQ(back[c].basis, models[c].basis);
    }
  }
}

TEST(ModelFile, RejectsWrongMagicAndMixedDims) {
  std::stringstream ss;
  write_feature_cache(ss, {});
  EXPECT_THROW(read_models(ss), std::runtime_error);
  std::vector<ClassModel> mixed{{1, Eigen::MatrixXd::Identity(3, 1)}, {2, Eigen::MatrixXd::Identity(4, 1)}};
  std::stringstream out;
  EXPECT_THROW(write_models(out, mixed), std::invalid_argument);
}
