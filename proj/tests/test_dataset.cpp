#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "subspace/dataset.hpp"
#include "support/test_support.hpp"

#include <fstream>
#include <set>

using namespace subspace;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) {
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

}  // namespace

TEST_CASE("load_pgm decodes binary P5") {
  std::vector<std::uint8_t> data = bytes_of("P5\n2 2\n255\n");
  data.insert(data.end(), {0, 255, 128, 64});
  const ImageSample s = load_pgm(data);
  REQUIRE(s.pixels.rows() == 2);
  REQUIRE(s.pixels.cols() == 2);
  CHECK(s.pixels(0, 0) == doctest::Approx(0.0));
  CHECK(s.pixels(0, 1) == doctest::Approx(1.0));
  CHECK(s.pixels(1, 0) == doctest::Approx(128.0 / 255.0));
  CHECK(s.pixels(1, 1) == doctest::Approx(64.0 / 255.0));
}

TEST_CASE("load_pgm decodes ASCII P2") {
  const ImageSample s = load_pgm(bytes_of("P2\n1 1\n100\n50\n"));
  REQUIRE(s.pixels.rows() == 1);
  CHECK(s.pixels(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("load_pgm handles comments and 16-bit big-endian payloads") {
  std::vector<std::uint8_t> data = bytes_of("P5\n# a comment\n1 # another\n1\n65535\n");
  data.insert(data.end(), {0x01, 0x00});  // 256 big-endian
  const ImageSample s = load_pgm(data);
  CHECK(s.pixels(0, 0) == doctest::Approx(256.0 / 65535.0));
}

TEST_CASE("load_pgm rejections name the offending field") {
  CHECK_THROWS_WITH_AS(load_pgm(bytes_of("P6\n1 1\n255\nx")), doctest::Contains("magic"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(load_pgm(bytes_of("P5\n2 2\n0\n")), doctest::Contains("maxval"),
                       std::runtime_error);
  std::vector<std::uint8_t> truncated = bytes_of("P5\n2 2\n255\n");
  truncated.insert(truncated.end(), {1, 2, 3});  // one byte short
  CHECK_THROWS_WITH_AS(load_pgm(truncated), doctest::Contains("truncated"), std::runtime_error);
  CHECK_THROWS_WITH_AS(load_pgm(bytes_of("P2\n1 1\n255\n")), doctest::Contains("truncated"),
                       std::runtime_error);
  CHECK_THROWS_AS(load_pgm(bytes_of("P5\n1 1\n70000\nxx")), std::runtime_error);
}

TEST_CASE("save_pgm round-trips maxval-255 pixel values exactly") {
  Rng rng(11);
  ImageSample s;
  s.pixels.resize(5, 4);
  for (Eigen::Index j = 0; j < 4; ++j)
    for (Eigen::Index i = 0; i < 5; ++i)
      s.pixels(i, j) = static_cast<double>(rng.index(256)) / 255.0;
  const ImageSample back = load_pgm(save_pgm(s));
  CHECK(back.pixels == s.pixels);  // exact
}

TEST_CASE("load_corpus reads the orl layout with natural file order") {
  testsup::TempDir dir("corpus");
  std::filesystem::create_directories(dir.path() / "s1");
  // Files named so lexicographic and natural order differ.
  const std::pair<const char*, double> files[] = {
      {"10.pgm", 10.0 / 255.0}, {"2.pgm", 2.0 / 255.0}, {"1.pgm", 1.0 / 255.0}};
  for (const auto& [name, value] : files) {
    ImageSample s;
    s.pixels = Matrix::Constant(2, 2, value);
    save_pgm_file(s, dir.path() / "s1" / name);
  }
  const Dataset d = load_corpus(dir.path());
  REQUIRE(d.size() == 3);
  CHECK(d.samples[0].pixels(0, 0) == doctest::Approx(1.0 / 255.0));
  CHECK(d.samples[1].pixels(0, 0) == doctest::Approx(2.0 / 255.0));
  CHECK(d.samples[2].pixels(0, 0) == doctest::Approx(10.0 / 255.0));
  CHECK(d.samples[0].label == "s1");
  CHECK(d.samples[0].source_index == 0);
  CHECK(d.samples[2].source_index == 2);
}

TEST_CASE("load_corpus single subject single image") {
  testsup::TempDir dir("corpus1");
  std::filesystem::create_directories(dir.path() / "only");
  ImageSample s;
  s.pixels = Matrix::Zero(3, 2);
  save_pgm_file(s, dir.path() / "only" / "a.pgm");
  const Dataset d = load_corpus(dir.path());
  CHECK(d.size() == 1);
  CHECK(d.samples[0].label == "only");
}

TEST_CASE("load_corpus rejects mixed sizes and empty subjects") {
  testsup::TempDir dir("corpus_bad");
  std::filesystem::create_directories(dir.path() / "s1");
  std::filesystem::create_directories(dir.path() / "s2");
  ImageSample a, b;
  a.pixels = Matrix::Zero(4, 4);
  b.pixels = Matrix::Zero(2, 2);
  save_pgm_file(a, dir.path() / "s1" / "1.pgm");
  save_pgm_file(b, dir.path() / "s2" / "1.pgm");
  CHECK_THROWS_WITH_AS(load_corpus(dir.path()), doctest::Contains("mixed image sizes"),
                       std::runtime_error);

  testsup::TempDir dir2("corpus_empty");
  std::filesystem::create_directories(dir2.path() / "s1");
  CHECK_THROWS_WITH_AS(load_corpus(dir2.path()), doctest::Contains("no PGM files"),
                       std::runtime_error);
}

TEST_CASE("natural_less orders digit runs numerically") {
  CHECK(natural_less("2", "10"));
  CHECK(!natural_less("10", "2"));
  CHECK(natural_less("s9", "s10"));
  CHECK(natural_less("a1b2", "a1b10"));
  CHECK(!natural_less("abc", "abc"));
}

namespace {

Dataset toy_dataset(int subjects, int per_subject) {
  Dataset d;
  for (int s = 0; s < subjects; ++s)
    for (int i = 0; i < per_subject; ++i) {
      ImageSample sample;
      sample.pixels = Matrix::Constant(2, 2, s + 0.01 * i);
      sample.label = "s" + std::to_string(s);
      sample.source_index = i;
      d.samples.push_back(std::move(sample));
    }
  return d;
}

}  // namespace

TEST_CASE("split first_k takes the lowest source indices") {
  const Dataset d = toy_dataset(3, 5);
  const Split sp = split(d, 2, SplitPolicy::first_k);
  CHECK(sp.train.size() == 6);
  CHECK(sp.test.size() == 9);
  for (const ImageSample& s : sp.train.samples) CHECK(s.source_index < 2);
  for (const ImageSample& s : sp.test.samples) CHECK(s.source_index >= 2);
}

TEST_CASE("split k = size-1 leaves a singleton test set per subject") {
  const Dataset d = toy_dataset(2, 4);
  const Split sp = split(d, 3, SplitPolicy::first_k);
  CHECK(sp.test.size() == 2);
}

TEST_CASE("split seeded_random is deterministic and respects counts") {
  const Dataset d = toy_dataset(4, 6);
  const Split a = split(d, 3, SplitPolicy::seeded_random, 99);
  const Split b = split(d, 3, SplitPolicy::seeded_random, 99);
  REQUIRE(a.train.size() == b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train.samples[i].label == b.train.samples[i].label);
    CHECK(a.train.samples[i].source_index == b.train.samples[i].source_index);
  }
  CHECK(a.train.size() == 12);
  CHECK(a.test.size() == 12);

  // Train and test are disjoint and cover the source.
  std::set<std::pair<std::string, int>> seen;
  for (const ImageSample& s : a.train.samples) seen.insert({s.label, s.source_index});
  for (const ImageSample& s : a.test.samples) {
    CHECK(!seen.count({s.label, s.source_index}));
    seen.insert({s.label, s.source_index});
  }
  CHECK(seen.size() == d.size());

  const Split c = split(d, 3, SplitPolicy::seeded_random, 100);
  bool any_difference = false;
  for (std::size_t i = 0; i < c.train.size(); ++i)
    any_difference = any_difference ||
                     c.train.samples[i].source_index != a.train.samples[i].source_index;
  CHECK(any_difference);  // different seed, different draw (for this data)
}

TEST_CASE("split rejects a subject with too few samples") {
  const Dataset d = toy_dataset(2, 3);
  CHECK_THROWS_WITH_AS(split(d, 3, SplitPolicy::first_k), doctest::Contains("s0"),
                       std::invalid_argument);
}

TEST_CASE("vectorize stacks column-major") {
  Dataset d;
  ImageSample s;
  s.pixels.resize(2, 2);
  s.pixels << 1, 2, 3, 4;
  s.label = "a";
  d.samples.push_back(s);
  const VectorizedSet v = vectorize(d);
  REQUIRE(v.data.rows() == 4);
  CHECK(v.data.col(0).isApprox(Vector{{1.0, 3.0, 2.0, 4.0}}, 0));
  CHECK(v.labels[0] == "a");

  // Round-trip back to the matrix.
  const Matrix back = v.data.col(0).reshaped(2, 2);
  CHECK(back == s.pixels);
}

TEST_CASE("columns_of emits sample-major column order and reconstructs samples") {
  Dataset d = toy_dataset(1, 2);
  d.samples[0].pixels.resize(2, 3);
  d.samples[0].pixels << 1, 2, 3, 4, 5, 6;
  d.samples[1].pixels.resize(2, 3);
  d.samples[1].pixels << 7, 8, 9, 10, 11, 12;
  const Matrix cols = columns_of(d);
  REQUIRE(cols.rows() == 2);
  REQUIRE(cols.cols() == 6);
  CHECK(cols.col(0).isApprox(Vector{{1.0, 4.0}}, 0));
  CHECK(cols.col(3).isApprox(Vector{{7.0, 10.0}}, 0));
  for (int i = 0; i < 2; ++i)
    CHECK(Matrix(cols.middleCols(3 * i, 3)) == d.samples[static_cast<std::size_t>(i)].pixels);
}

TEST_CASE("columns_of count for multiple 2x2 samples") {
  const Dataset d = toy_dataset(2, 1);
  CHECK(columns_of(d).cols() == 4);
}

TEST_CASE("synth_gaussian produces rank-1 data for a single spectrum entry") {
  const Dataset d = synth_gaussian(50, 3, {1.0}, 5);
  const Matrix axis = synth_gaussian_axes(3, 1, 5);
  for (const ImageSample& s : d.samples) {
    const Vector x = s.pixels.col(0);
    const Vector residual = x - axis * (axis.transpose() * x);
    CHECK(residual.norm() <= 1e-12);
  }
}

TEST_CASE("synth_gaussian is deterministic given the seed") {
  const Dataset a = synth_gaussian(20, 4, {2.0, 1.0}, 7);
  const Dataset b = synth_gaussian(20, 4, {2.0, 1.0}, 7);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.samples[i].pixels == b.samples[i].pixels);
}

TEST_CASE("synth_gaussian sample covariance approaches the requested spectrum") {
  const Dataset d = synth_gaussian(500, 2, {5.0, 1.0}, 3);
  Matrix x(2, 500);
  for (std::size_t i = 0; i < d.size(); ++i)
    x.col(static_cast<Eigen::Index>(i)) = d.samples[i].pixels.col(0);
  const Vector mean = x.rowwise().mean();
  x.colwise() -= mean;
  const Matrix cov = x * x.transpose() / 500.0;
  const SymEigen eig = eigh_desc(cov);
  CHECK(eig.eigenvalues[0] == doctest::Approx(5.0).epsilon(0.2));
  CHECK(eig.eigenvalues[1] == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("synth_gaussian rejects invalid spectra") {
  CHECK_THROWS_AS(synth_gaussian(10, 3, {}, 0), std::invalid_argument);
  CHECK_THROWS_AS(synth_gaussian(10, 3, {1.0, 2.0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(synth_gaussian(10, 2, {1.0, 1.0, 1.0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(synth_gaussian(10, 2, {1.0, -1.0}, 0), std::invalid_argument);
}

TEST_CASE("inject_outliers alters exactly ceil(fraction*n) samples") {
  const Dataset d = synth_gaussian(100, 3, {1.0, 0.5}, 21);
  const Dataset noisy = inject_outliers(d, 0.1, 5.0, 17);
  int altered = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (noisy.samples[i].pixels != d.samples[i].pixels) ++altered;
  CHECK(altered == 10);

  const Dataset one = inject_outliers(d, 0.001, 5.0, 17);
  altered = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (one.samples[i].pixels != d.samples[i].pixels) ++altered;
  CHECK(altered == 1);
}

TEST_CASE("inject_outliers with magnitude zero changes nothing") {
  const Dataset d = synth_gaussian(30, 3, {1.0}, 2);
  const Dataset same = inject_outliers(d, 0.2, 0.0, 4);
  for (std::size_t i = 0; i < d.size(); ++i)
    CHECK(same.samples[i].pixels == d.samples[i].pixels);
}

TEST_CASE("inject_outliers preserves labels and is deterministic") {
  const Dataset d = synth_gaussian(40, 3, {1.0}, 9);
  const Dataset a = inject_outliers(d, 0.25, 2.0, 13);
  const Dataset b = inject_outliers(d, 0.25, 2.0, 13);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(a.samples[i].label == d.samples[i].label);
    CHECK(a.samples[i].pixels == b.samples[i].pixels);
  }
}
