#include "subspace/dataset.hpp"

#include "subspace/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace subspace {

namespace fs = std::filesystem;

namespace {

// Pull the next whitespace-delimited token, skipping '#' comments.
std::string next_token(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    const char c = static_cast<char>(bytes[pos]);
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  std::string token;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])) &&
         bytes[pos] != '#') {
    token.push_back(static_cast<char>(bytes[pos]));
    ++pos;
  }
  return token;
}

long parse_header_int(const std::vector<std::uint8_t>& bytes, std::size_t& pos,
                      const char* field) {
  const std::string tok = next_token(bytes, pos);
  if (tok.empty()) throw std::runtime_error(std::string("pgm: missing header field ") + field);
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(std::string("pgm: header field ") + field + " is not a number: '" +
                             tok + "'");
  }
}

void check_uniform(const Dataset& d) {
  if (d.samples.empty()) return;
  const Eigen::Index r = d.samples.front().pixels.rows();
  const Eigen::Index c = d.samples.front().pixels.cols();
  for (const ImageSample& s : d.samples) {
    if (s.pixels.rows() != r || s.pixels.cols() != c) {
      std::ostringstream msg;
      msg << "dataset: sample '" << s.label << "/" << s.source_index << "' has size "
          << s.pixels.rows() << "x" << s.pixels.cols() << ", expected " << r << "x" << c;
      throw std::runtime_error(msg.str());
    }
  }
}

}  // namespace

bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const bool da = std::isdigit(static_cast<unsigned char>(a[i]));
    const bool db = std::isdigit(static_cast<unsigned char>(b[j]));
    if (da && db) {
      std::size_t i0 = i, j0 = j;
      while (i < a.size() && std::isdigit(static_cast<unsigned char>(a[i]))) ++i;
      while (j < b.size() && std::isdigit(static_cast<unsigned char>(b[j]))) ++j;
      std::string na = a.substr(i0, i - i0), nb = b.substr(j0, j - j0);
      const std::string ta = na.substr(std::min(na.find_first_not_of('0'), na.size() - 1));
      const std::string tb = nb.substr(std::min(nb.find_first_not_of('0'), nb.size() - 1));
      if (ta.size() != tb.size()) return ta.size() < tb.size();
      if (ta != tb) return ta < tb;
      if (na != nb) return na < nb;  // differ only by leading zeros
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

ImageSample load_pgm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  const std::string magic = next_token(bytes, pos);
  if (magic != "P5" && magic != "P2")
    throw std::runtime_error("pgm: bad magic '" + magic + "' (expected P5 or P2)");

  const long width = parse_header_int(bytes, pos, "width");
  const long height = parse_header_int(bytes, pos, "height");
  const long maxval = parse_header_int(bytes, pos, "maxval");
  if (width < 1 || height < 1)
    throw std::runtime_error("pgm: non-positive width/height in header");
  if (maxval == 0) throw std::runtime_error("pgm: maxval is 0");
  if (maxval < 0 || maxval > 65535)
    throw std::runtime_error("pgm: maxval " + std::to_string(maxval) + " out of range (1..65535)");

  ImageSample out;
  out.pixels.resize(height, width);
  const double denom = static_cast<double>(maxval);
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);

  if (magic == "P5") {
    // Exactly one whitespace byte separates the header from the payload.
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
      throw std::runtime_error("pgm: missing separator after maxval");
    ++pos;
    const int bytes_per = maxval > 255 ? 2 : 1;
    if (bytes.size() - pos < count * static_cast<std::size_t>(bytes_per))
      throw std::runtime_error("pgm: truncated pixel payload (" +
                               std::to_string(bytes.size() - pos) + " bytes, need " +
                               std::to_string(count * static_cast<std::size_t>(bytes_per)) + ")");
    for (long r = 0; r < height; ++r)
      for (long c = 0; c < width; ++c) {
        unsigned value = bytes[pos++];
        if (bytes_per == 2) value = (value << 8) | bytes[pos++];  // big-endian
        out.pixels(r, c) = static_cast<double>(value) / denom;
      }
  } else {
    for (long r = 0; r < height; ++r)
      for (long c = 0; c < width; ++c) {
        const std::string tok = next_token(bytes, pos);
        if (tok.empty()) throw std::runtime_error("pgm: truncated pixel payload (ASCII)");
        long v = 0;
        try {
          v = std::stol(tok);
        } catch (const std::exception&) {
          throw std::runtime_error("pgm: bad ASCII pixel value '" + tok + "'");
        }
        if (v < 0 || v > maxval)
          throw std::runtime_error("pgm: pixel value " + std::to_string(v) + " exceeds maxval");
        out.pixels(r, c) = static_cast<double>(v) / denom;
      }
  }
  return out;
}

ImageSample load_pgm_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("pgm: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return load_pgm(bytes);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> save_pgm(const ImageSample& sample) {
  std::ostringstream header;
  header << "P5\n" << sample.pixels.cols() << " " << sample.pixels.rows() << "\n255\n";
  const std::string h = header.str();
  std::vector<std::uint8_t> bytes(h.begin(), h.end());
  for (Eigen::Index r = 0; r < sample.pixels.rows(); ++r)
    for (Eigen::Index c = 0; c < sample.pixels.cols(); ++c) {
      const double v = std::clamp(sample.pixels(r, c), 0.0, 1.0);
      bytes.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
    }
  return bytes;
}

void save_pgm_file(const ImageSample& sample, const fs::path& path) {
  const std::vector<std::uint8_t> bytes = save_pgm(sample);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("pgm: cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

Dataset load_corpus(const fs::path& root) {
  if (!fs::is_directory(root))
    throw std::runtime_error("corpus: " + root.string() + " is not a directory");

  std::vector<std::string> subjects;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) subjects.push_back(entry.path().filename().string());
  if (subjects.empty())
    throw std::runtime_error("corpus: no subject directories under " + root.string());
  std::sort(subjects.begin(), subjects.end(), natural_less);

  Dataset d;
  for (const std::string& subject : subjects) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(root / subject)) {
      if (!entry.is_regular_file()) continue;
      std::string ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      if (ext == ".pgm") files.push_back(entry.path().filename().string());
    }
    if (files.empty())
      throw std::runtime_error("corpus: subject directory '" + subject + "' has no PGM files");
    std::sort(files.begin(), files.end(), natural_less);
    int ordinal = 0;
    for (const std::string& file : files) {
      ImageSample s = load_pgm_file(root / subject / file);
      s.label = subject;
      s.source_index = ordinal++;
      d.samples.push_back(std::move(s));
    }
  }

  // Reject mixed image sizes, listing the offenders.
  const Eigen::Index r = d.rows(), c = d.cols();
  std::string offenders;
  for (const ImageSample& s : d.samples)
    if (s.pixels.rows() != r || s.pixels.cols() != c)
      offenders += " " + s.label + "/" + std::to_string(s.source_index) + "(" +
                   std::to_string(s.pixels.rows()) + "x" + std::to_string(s.pixels.cols()) + ")";
  if (!offenders.empty())
    throw std::runtime_error("corpus: mixed image sizes, expected " + std::to_string(r) + "x" +
                             std::to_string(c) + ", offenders:" + offenders);
  return d;
}

Split split(const Dataset& d, int k_per_subject, SplitPolicy policy, std::uint64_t seed) {
  if (k_per_subject < 1) throw std::invalid_argument("split: k_per_subject must be positive");
  check_uniform(d);

  // Group sample indices per label, keeping dataset order (source_index order).
  std::map<std::string, std::vector<std::size_t>> by_label;
  std::vector<std::string> label_order;
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    auto [it, inserted] = by_label.try_emplace(d.samples[i].label);
    if (inserted) label_order.push_back(d.samples[i].label);
    it->second.push_back(i);
  }

  Split out;
  out.policy = policy;
  out.k_per_subject = k_per_subject;
  for (const std::string& label : label_order) {
    std::vector<std::size_t>& idx = by_label[label];
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return d.samples[a].source_index < d.samples[b].source_index;
    });
    if (idx.size() <= static_cast<std::size_t>(k_per_subject))
      throw std::invalid_argument("split: subject '" + label + "' has only " +
                                  std::to_string(idx.size()) + " samples, needs more than " +
                                  std::to_string(k_per_subject));
    std::vector<bool> in_train(idx.size(), false);
    if (policy == SplitPolicy::first_k) {
      for (int i = 0; i < k_per_subject; ++i) in_train[static_cast<std::size_t>(i)] = true;
    } else {
      Rng rng = Rng::keyed(seed, label);
      for (std::size_t pick :
           rng.sample_without_replacement(idx.size(), static_cast<std::size_t>(k_per_subject)))
        in_train[pick] = true;
    }
    for (std::size_t i = 0; i < idx.size(); ++i)
      (in_train[i] ? out.train : out.test).samples.push_back(d.samples[idx[i]]);
  }
  return out;
}

VectorizedSet vectorize(const Dataset& d) {
  if (d.samples.empty()) throw std::invalid_argument("vectorize: empty dataset");
  check_uniform(d);
  const Eigen::Index len = d.rows() * d.cols();
  VectorizedSet out;
  out.data.resize(len, static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) {
    // Eigen matrices are column-major, so a reshaped view is already the
    // column-0-first stacking.
    out.data.col(static_cast<Eigen::Index>(i)) =
        d.samples[i].pixels.reshaped(len, 1);
    out.labels.push_back(d.samples[i].label);
  }
  return out;
}

Matrix columns_of(const Dataset& d) {
  if (d.samples.empty()) throw std::invalid_argument("columns_of: empty dataset");
  check_uniform(d);
  Matrix out(d.rows(), static_cast<Eigen::Index>(d.size()) * d.cols());
  Eigen::Index at = 0;
  for (const ImageSample& s : d.samples) {
    out.middleCols(at, d.cols()) = s.pixels;
    at += d.cols();
  }
  return out;
}

Matrix synth_gaussian_axes(int d, int spectrum_len, std::uint64_t seed) {
  if (spectrum_len < 1 || spectrum_len > d)
    throw std::invalid_argument("synth_gaussian: spectrum length must be in [1, d]");
  Rng rng = Rng::keyed(seed, "axes");
  return orthonormalize(rng.normal_matrix(d, spectrum_len)).columns;
}

Dataset synth_gaussian(int n, int d, const std::vector<double>& spectrum, std::uint64_t seed) {
  if (n < 1 || d < 1) throw std::invalid_argument("synth_gaussian: n and d must be positive");
  if (spectrum.empty() || spectrum.size() > static_cast<std::size_t>(d))
    throw std::invalid_argument("synth_gaussian: spectrum length must be in [1, d]");
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    if (spectrum[i] <= 0.0)
      throw std::invalid_argument("synth_gaussian: spectrum entries must be positive");
    if (i > 0 && spectrum[i] > spectrum[i - 1])
      throw std::invalid_argument("synth_gaussian: spectrum must be nonincreasing");
  }

  const Matrix axes = synth_gaussian_axes(d, static_cast<int>(spectrum.size()), seed);
  Rng rng = Rng::keyed(seed, "samples");
  Dataset out;
  for (int i = 0; i < n; ++i) {
    Vector z(static_cast<Eigen::Index>(spectrum.size()));
    for (Eigen::Index j = 0; j < z.size(); ++j)
      z[j] = std::sqrt(spectrum[static_cast<std::size_t>(j)]) * rng.normal();
    ImageSample s;
    s.pixels = axes * z;
    s.label = std::to_string(i);
    s.source_index = 0;
    out.samples.push_back(std::move(s));
  }
  return out;
}

Dataset inject_outliers(const Dataset& d, double fraction, double magnitude, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("inject_outliers: fraction must be in (0,1)");
  const std::size_t n = d.size();
  const std::size_t count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  if (count < 1) throw std::invalid_argument("inject_outliers: fraction*n < 1");

  Rng rng = Rng::keyed(seed, "outliers");
  Dataset out = d;
  for (std::size_t pick : rng.sample_without_replacement(n, count)) {
    Matrix& px = out.samples[pick].pixels;
    for (Eigen::Index c = 0; c < px.cols(); ++c)
      for (Eigen::Index r = 0; r < px.rows(); ++r)
        px(r, c) += rng.uniform(-magnitude, magnitude);
  }
  return out;
}

}  // namespace subspace
