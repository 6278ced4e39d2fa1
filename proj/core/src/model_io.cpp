#include <bit>
#include <cstring>

#include "smell/error.hpp"
#include "smell/hash.hpp"
#include "smell/io.hpp"
#include "smell/models.hpp"

namespace smell {

namespace {

constexpr std::string_view kMagic = "SMELLMDL";
constexpr std::uint32_t kFormatVersion = 1;

class Writer {
 public:
  template <typename T>
  void put(T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    out.append(reinterpret_cast<const char*>(b), sizeof(T));
  }
  void doubles(const std::vector<double>& v) {
    put<std::uint64_t>(v.size());
    for (double d : v) put(d);
  }
  std::string out;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > in_.size()) throw FormatError("model file truncated");
    unsigned char b[sizeof(T)];
    std::memcpy(b, in_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
  std::size_t count(std::size_t element_size) {
    const auto n = get<std::uint64_t>();
    if (n > (in_.size() - pos_) / std::max<std::size_t>(1, element_size)) throw FormatError("model file: bad length");
    return static_cast<std::size_t>(n);
  }
  std::vector<double> doubles() {
    std::vector<double> v(count(8));
    for (double& d : v) d = get<double>();
    return v;
  }
  std::string_view take(std::size_t n) {
    if (pos_ + n > in_.size()) throw FormatError("model file truncated");
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

std::string encode_blob(const ModelParameters& p) {
  Writer w;
  w.doubles(p.weights);
  w.doubles(p.bias);
  w.put<std::uint64_t>(p.trees.size());
  for (const auto& tree : p.trees) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(tree.nodes().size()));
    for (const auto& n : tree.nodes()) {
      w.put<std::int32_t>(n.feature);
      w.put<double>(n.threshold);
      w.put<std::int32_t>(n.left);
      w.put<std::int32_t>(n.right);
      w.put<std::uint32_t>(static_cast<std::uint32_t>(n.value.size()));
      for (double v : n.value) w.put(v);
    }
  }
  w.doubles(p.init);
  w.put<std::uint64_t>(p.train_X.rows());
  w.put<std::uint64_t>(p.train_X.cols());
  for (std::size_t r = 0; r < p.train_X.rows(); ++r) {
    const auto row = p.train_X.row(r);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(row.nnz()));
    for (std::size_t i = 0; i < row.nnz(); ++i) {
      w.put<std::int32_t>(row.cols[i]);
      w.put<double>(row.values[i]);
    }
  }
  w.put<std::uint64_t>(p.train_y.size());
  for (int y : p.train_y) w.put<std::int32_t>(y);
  return std::move(w.out);
}

ModelParameters decode_blob(std::string_view blob) {
  Reader r(blob);
  ModelParameters p;
  p.weights = r.doubles();
  p.bias = r.doubles();
  p.trees.resize(r.count(4));
  for (auto& tree : p.trees) {
    auto& nodes = tree.nodes();
    nodes.resize(r.get<std::uint32_t>());
    for (auto& n : nodes) {
      n.feature = r.get<std::int32_t>();
      n.threshold = r.get<double>();
      n.left = r.get<std::int32_t>();
      n.right = r.get<std::int32_t>();
      n.value.resize(r.get<std::uint32_t>());
      for (double& v : n.value) v = r.get<double>();
    }
    for (const auto& n : nodes) {
      if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || static_cast<std::size_t>(n.left) >= nodes.size() ||
                             static_cast<std::size_t>(n.right) >= nodes.size())) {
        throw FormatError("model file: tree child index out of range");
      }
    }
  }
  p.init = r.doubles();
  const auto rows = r.get<std::uint64_t>();
  const auto cols = r.get<std::uint64_t>();
  p.train_X = SparseMatrix(static_cast<std::size_t>(cols));
  for (std::uint64_t i = 0; i < rows; ++i) {
    const auto nnz = r.get<std::uint32_t>();
    std::vector<int> c(nnz);
    std::vector<double> v(nnz);
    for (std::uint32_t k = 0; k < nnz; ++k) {
      c[k] = r.get<std::int32_t>();
      v[k] = r.get<double>();
    }
    try {
      p.train_X.append_row(c, v);
    } catch (const std::exception& e) {
      throw FormatError(std::string("model file: bad stored row: ") + e.what());
    }
  }
  p.train_y.resize(r.count(4));
  for (int& y : p.train_y) y = r.get<std::int32_t>();
  if (!r.done()) throw FormatError("model file: trailing bytes after parameters");
  return p;
}

}  // namespace

std::string TrainedModel::serialize() const {
  const std::string blob = encode_blob(params_);
  nlohmann::json labels = nlohmann::json::array();
  for (auto l : encoding_.labels()) labels.push_back(to_string(l));
  nlohmann::json envelope = {
      {"format", "smell-model"},
      {"version", kFormatVersion},
      {"spec", spec_.to_json()},
      {"n_features", n_features_},
      {"n_classes", n_classes_},
      {"labels", labels},
      {"training", info_.to_json()},
      {"blob_bytes", blob.size()},
      {"blob_sha256", sha256_hex(blob)},
  };
  if (!metadata_.empty()) envelope["metadata"] = metadata_;
  const std::string header = envelope.dump();
  Writer w;
  w.out.append(kMagic);
  w.put<std::uint32_t>(kFormatVersion);
  w.put<std::uint64_t>(header.size());
  w.out += header;
  w.out += blob;
  return std::move(w.out);
}

TrainedModel TrainedModel::deserialize(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(kMagic.size()) != kMagic) throw FormatError("not a model file (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kFormatVersion) throw FormatError("unsupported model format version " + std::to_string(version));
  const auto header_len = r.get<std::uint64_t>();
  nlohmann::json env;
  try {
    env = nlohmann::json::parse(r.take(static_cast<std::size_t>(header_len)));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model file: bad JSON envelope: ") + e.what());
  }
  try {
    if (env.value("format", "") != "smell-model") throw FormatError("model file: wrong envelope format");
    const auto blob_len = env.at("blob_bytes").get<std::size_t>();
    const auto blob = r.take(blob_len);
    if (!r.done()) throw FormatError("model file: trailing bytes");
    if (sha256_hex(blob) != env.at("blob_sha256").get<std::string>()) throw FormatError("model file: checksum mismatch");
    std::vector<SmellLabel> labels;
    for (const auto& l : env.at("labels")) labels.push_back(parse_label_or_throw(l.get<std::string>()));
    const int n_classes = env.at("n_classes").get<int>();
    if (n_classes != static_cast<int>(labels.size())) throw FormatError("model file: label count mismatch");
    TrainedModel m(ModelSpec::from_json(env.at("spec")), env.at("n_features").get<std::size_t>(), n_classes,
                   LabelEncoding::from_labels(labels), decode_blob(blob),
                   TrainingInfo::from_json(env.value("training", nlohmann::json::object())));
    if (env.contains("metadata")) m.set_metadata(env["metadata"]);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model file: bad envelope field: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
}

void TrainedModel::set_metadata(nlohmann::json metadata) {
  if (!metadata.is_object()) throw InvalidArgument("model metadata must be a JSON object");
  metadata_ = std::move(metadata);
}

void TrainedModel::save(const std::filesystem::path& path) const { write_file_atomic(path, serialize()); }

TrainedModel TrainedModel::load(const std::filesystem::path& path) { return deserialize(read_file(path)); }

}  // namespace smell
