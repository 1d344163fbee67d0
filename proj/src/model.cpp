#include "kmp/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "json.hpp"
#include "kmp/error.hpp"

namespace kmp {
namespace {

using json = nlohmann::json;

constexpr char kMagic[8] = {'K', 'M', 'P', 'M', 'O', 'D', 'E', 'L'};

std::uint64_t fnv1a(const unsigned char* data, std::size_t size) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= data[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
  return v;
}

void put_f64(std::vector<unsigned char>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_matrix(std::vector<unsigned char>& out, const Matrix& m) {
  put_u64(out, static_cast<std::uint64_t>(m.size()) * 8);
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
}

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  const unsigned char* take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) throw CorruptionError(std::string("model file truncated while reading ") + what);
    const unsigned char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  std::uint64_t u64(const char* what) { return get_u64(take(8, what)); }

  Matrix matrix(Index rows, Index cols, const char* what) {
    const std::uint64_t expected = static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols) * 8;
    const std::uint64_t length = u64(what);
    if (length != expected) throw CorruptionError(std::string("unexpected block length for ") + what);
    const unsigned char* p = take(length, what);
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c, p += 8) m(r, c) = std::bit_cast<double>(get_u64(p));
    return m;
  }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

json config_to_json(const FitConfig& c) {
  json sigmas = json::array();
  for (const auto& s : c.sigmas) sigmas.push_back(s ? json(*s) : json(nullptr));
  return json{{"dim", c.dim},
              {"r", c.r},
              {"clusters", c.clusters},
              {"max_atoms", c.max_atoms},
              {"residual_tol", c.residual_tol},
              {"sigmas", sigmas},
              {"sigma_scale", c.sigma_scale},
              {"ridge", c.ridge},
              {"max_iters", c.max_iters},
              {"tol", c.tol},
              {"seed", c.seed}};
}

FitConfig config_from_json(const json& j) {
  FitConfig c;
  c.dim = j.at("dim").get<int>();
  c.r = j.at("r").get<double>();
  c.clusters = j.at("clusters").get<int>();
  c.max_atoms = j.at("max_atoms").get<int>();
  c.residual_tol = j.at("residual_tol").get<double>();
  for (const auto& s : j.at("sigmas")) c.sigmas.push_back(s.is_null() ? std::nullopt : std::optional<double>(s.get<double>()));
  c.sigma_scale = j.at("sigma_scale").get<double>();
  c.ridge = j.at("ridge").get<double>();
  c.max_iters = j.at("max_iters").get<int>();
  c.tol = j.at("tol").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void ProjectionModel::validate() const {
  const auto m = static_cast<Index>(train_views.size());
  if (m < 1) throw ValidationError("model has no views");
  if (alpha.size() != m || static_cast<Index>(kernels.size()) != m) {
    throw ValidationError("model weight/kernel counts do not match its view count");
  }
  double sum = 0.0;
  for (Index i = 0; i < m; ++i) {
    if (!(alpha(i) >= 0.0)) throw ValidationError("model alpha has a negative entry");
    sum += alpha(i);
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("model alpha does not sum to 1");
  if (!projection.allFinite()) throw ValidationError("projection has non-finite entries");
  for (const auto& v : train_views) {
    if (v.rows() != projection.rows()) throw ValidationError("training view rows do not match projection rows");
  }
}

Matrix embed_train(const ProjectionModel& model) {
  std::vector<Matrix> grams;
  grams.reserve(model.n_views());
  for (std::size_t i = 0; i < model.n_views(); ++i) grams.push_back(gram(model.train_views[i], model.kernels[i]));
  return fuse(grams, model.alpha) * model.projection;
}

Matrix embed_oos(const ProjectionModel& model, const std::vector<Matrix>& queries) {
  if (queries.size() != model.n_views()) {
    throw ArgumentError("expected " + std::to_string(model.n_views()) + " views, got " + std::to_string(queries.size()));
  }
  std::vector<Matrix> rows;
  rows.reserve(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (queries[i].cols() != model.train_views[i].cols()) {
      throw ArgumentError("view " + std::to_string(i + 1) + " has dimension " + std::to_string(queries[i].cols()) +
                          ", model expects " + std::to_string(model.train_views[i].cols()));
    }
    if (queries[i].rows() != queries.front().rows()) {
      throw ArgumentError("view " + std::to_string(i + 1) + " has a different query count than view 1");
    }
    rows.push_back(cross_gram(queries[i], model.train_views[i], model.kernels[i]));
  }
  return fuse(rows, model.alpha) * model.projection;
}

Vector embed_oos(const ProjectionModel& model, const std::vector<Vector>& sample) {
  std::vector<Matrix> queries;
  queries.reserve(sample.size());
  for (const auto& v : sample) queries.push_back(v.transpose());
  return embed_oos(model, queries).row(0).transpose();
}

std::vector<unsigned char> serialize_model(const ProjectionModel& model) {
  model.validate();
  json header;
  header["format_version"] = ProjectionModel::kFormatVersion;
  header["n_train"] = model.n_train();
  header["dim"] = model.dim();
  header["views"] = model.n_views();
  json dims = json::array();
  for (const auto& v : model.train_views) dims.push_back(v.cols());
  header["view_dims"] = dims;
  header["alpha"] = std::vector<double>(model.alpha.data(), model.alpha.data() + model.alpha.size());
  header["eigenvalues"] = std::vector<double>(model.eigenvalues.data(), model.eigenvalues.data() + model.eigenvalues.size());
  json kernels = json::array();
  for (const auto& k : model.kernels) kernels.push_back({{"kind", std::string(kernel_kind_name(k.kind))}, {"sigma", k.sigma}});
  header["kernels"] = kernels;
  header["config"] = config_to_json(model.config);
  const std::string text = header.dump();

  std::vector<unsigned char> out(std::begin(kMagic), std::end(kMagic));
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  put_matrix(out, model.projection);
  for (const auto& v : model.train_views) put_matrix(out, v);
  put_u64(out, fnv1a(out.data(), out.size()));
  return out;
}

ProjectionModel deserialize_model(const std::vector<unsigned char>& bytes) {
  Reader reader(bytes);
  const unsigned char* magic = reader.take(sizeof(kMagic), "magic");
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw CorruptionError("not a KMP model file (bad magic)");
  const std::uint64_t header_length = reader.u64("header length");
  const unsigned char* header_bytes = reader.take(header_length, "header");

  json header;
  try {
    header = json::parse(header_bytes, header_bytes + header_length);
  } catch (const json::exception& e) {
    throw CorruptionError(std::string("model header is not valid JSON: ") + e.what());
  }

  ProjectionModel model;
  try {
    const int version = header.at("format_version").get<int>();
    if (version != ProjectionModel::kFormatVersion) {
      throw VersionError("model format version " + std::to_string(version) + " is not supported (expected " +
                         std::to_string(ProjectionModel::kFormatVersion) + ")");
    }
    const auto n = header.at("n_train").get<Index>();
    const auto d = header.at("dim").get<Index>();
    const auto m = header.at("views").get<std::size_t>();
    const auto dims = header.at("view_dims").get<std::vector<Index>>();
    const auto alpha = header.at("alpha").get<std::vector<double>>();
    const auto eig = header.at("eigenvalues").get<std::vector<double>>();
    if (dims.size() != m || alpha.size() != m || header.at("kernels").size() != m) {
      throw CorruptionError("model header view counts are inconsistent");
    }
    model.alpha = Eigen::Map<const Vector>(alpha.data(), static_cast<Index>(alpha.size()));
    model.eigenvalues = Eigen::Map<const Vector>(eig.data(), static_cast<Index>(eig.size()));
    for (const auto& k : header.at("kernels")) {
      model.kernels.push_back({parse_kernel_kind(k.at("kind").get<std::string>()), k.at("sigma").get<double>()});
    }
    model.config = config_from_json(header.at("config"));

    model.projection = reader.matrix(n, d, "projection");
    for (std::size_t i = 0; i < m; ++i) model.train_views.push_back(reader.matrix(n, dims[i], "training view"));
  } catch (const json::exception& e) {
    throw CorruptionError(std::string("model header is missing fields: ") + e.what());
  }

  const std::size_t covered = reader.position();
  const std::uint64_t stored = reader.u64("checksum");
  if (reader.remaining() != 0) throw CorruptionError("trailing bytes after model checksum");
  if (stored != fnv1a(bytes.data(), covered)) throw ChecksumError("model checksum mismatch");
  model.validate();
  return model;
}

void save_model(const ProjectionModel& model, const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

ProjectionModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace kmp
