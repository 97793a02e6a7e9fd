#include "filt/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace filt {

namespace {

constexpr char kMagic[4] = {'F', 'I', 'L', 'T'};

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  Reader(const std::string& bytes, std::string source) : bytes_(bytes), source_(std::move(source)) {}

  template <typename U>
  U get(const std::string& field) {
    need(sizeof(U), field);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }

  std::string take(std::size_t n, const std::string& field) {
    need(n, field);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const std::string& field) {
    if (bytes_.size() - pos_ < n) {
      throw ParseError(source_ + ": truncated checkpoint while reading " + field);
    }
  }

  const std::string& bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

std::filesystem::path metadata_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".meta.json");
}

nlohmann::json dims_to_json(const ModelDims& dims) {
  return {{"num_entities", dims.num_entities}, {"num_relations", dims.num_relations},
          {"num_concepts", dims.num_concepts}, {"dim", dims.dim},
          {"time_dim", dims.time_dim},         {"encoder", std::string(to_string(dims.encoder))}};
}

ModelDims dims_from_json(const nlohmann::json& j) {
  ModelDims d;
  auto field = [&](const char* name) -> const nlohmann::json& {
    if (!j.contains(name)) throw ParseError(std::string("checkpoint metadata lacks field '") + name + "'");
    return j.at(name);
  };
  d.num_entities = field("num_entities").get<std::size_t>();
  d.num_relations = field("num_relations").get<std::size_t>();
  d.num_concepts = field("num_concepts").get<std::size_t>();
  d.dim = field("dim").get<std::size_t>();
  d.time_dim = field("time_dim").get<std::size_t>();
  d.encoder = parse_encoder(field("encoder").get<std::string>());
  return d;
}

void save_checkpoint(const ModelParams& params, const CheckpointMeta& meta,
                     const std::filesystem::path& path) {
  const auto tensors = params.tensors();
  std::string out(kMagic, 4);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const ParamTensor* t : tensors) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t->name.size()));
    out += t->name;
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t->shape.size()));
    for (std::size_t s : t->shape) put_le<std::uint64_t>(out, s);
    for (double v : t->values) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  write_file(path, out);

  nlohmann::json side;
  side["format"] = "filt-checkpoint";
  side["version"] = kCheckpointVersion;
  side["dims"] = dims_to_json(meta.dims);
  side["extra"] = meta.extra;
  write_file(metadata_path(path), side.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string src = path.string();
  const auto side_path = metadata_path(path);
  if (!std::filesystem::exists(path)) throw Error("checkpoint not found: " + src);
  if (!std::filesystem::exists(side_path)) throw Error("checkpoint metadata not found: " + side_path.string());

  nlohmann::json side;
  try {
    side = nlohmann::json::parse(read_file(side_path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(side_path.string() + ": " + e.what());
  }
  if (!side.contains("dims")) throw ParseError(side_path.string() + ": missing field 'dims'");
  Checkpoint ck;
  ck.meta.dims = dims_from_json(side.at("dims"));
  if (side.contains("extra")) ck.meta.extra = side.at("extra");
  ck.params = allocate_params(ck.meta.dims);

  const std::string bytes = read_file(path);
  Reader r(bytes, src);
  if (r.take(4, "magic") != std::string(kMagic, 4)) throw ParseError(src + ": bad magic (not a checkpoint)");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw ParseError(src + ": unsupported version " + std::to_string(version));
  }
  const auto expected = ck.params.tensors();
  const auto count = r.get<std::uint32_t>("tensor count");
  if (count != expected.size()) {
    throw ShapeError(src + ": tensor count " + std::to_string(count) + " disagrees with metadata (" +
                     std::to_string(expected.size()) + ")");
  }
  for (ParamTensor* t : expected) {
    const auto len = r.get<std::uint32_t>("name length of tensor '" + t->name + "'");
    const std::string name = r.take(len, "name of tensor '" + t->name + "'");
    if (name != t->name) throw ParseError(src + ": expected tensor '" + t->name + "', found '" + name + "'");
    const auto rank = r.get<std::uint32_t>("rank of " + name);
    std::vector<std::size_t> shape(rank);
    for (auto& s : shape) s = static_cast<std::size_t>(r.get<std::uint64_t>("shape of " + name));
    if (shape != t->shape) {
      throw ShapeError(src + ": dimension mismatch for '" + name + "': file " + shape_string(shape) +
                       ", metadata implies " + shape_string(t->shape));
    }
    for (auto& v : t->values) v = std::bit_cast<double>(r.get<std::uint64_t>("values of " + name));
  }
  if (!r.at_end()) throw ParseError(src + ": trailing bytes after the last tensor");
  return ck;
}

}  // namespace filt
