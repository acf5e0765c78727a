#include "affordmap/persistence/weights_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

namespace affordmap::persistence {

namespace {

constexpr const char* kMagic = "affordmap-weights";

nlohmann::json layer_json(const diffnet::LayerSpec& l) {
  nlohmann::json j{{"kind", diffnet::to_string(l.kind)}, {"in", l.in_dim}, {"out", l.out_dim}};
  if (l.kind == diffnet::LayerKind::scale_shift) {
    j["scale"] = l.scale;
    j["shift"] = l.shift;
  }
  return j;
}

diffnet::LayerSpec layer_from_json(const nlohmann::json& j) {
  diffnet::LayerSpec l;
  l.kind = diffnet::layer_kind_from_string(j.at("kind").get<std::string>());
  l.in_dim = j.at("in").get<std::size_t>();
  l.out_dim = j.at("out").get<std::size_t>();
  if (l.kind == diffnet::LayerKind::scale_shift) {
    l.scale = j.at("scale").get<std::vector<double>>();
    l.shift = j.at("shift").get<std::vector<double>>();
  }
  return l;
}

nlohmann::json layers_json(const std::vector<diffnet::LayerSpec>& layers) {
  auto arr = nlohmann::json::array();
  for (const auto& l : layers) arr.push_back(layer_json(l));
  return arr;
}

std::vector<diffnet::LayerSpec> layers_from_json(const nlohmann::json& j) {
  std::vector<diffnet::LayerSpec> out;
  for (const auto& l : j) out.push_back(layer_from_json(l));
  return out;
}

std::vector<std::byte> to_le_bytes(std::span<const float> values) {
  std::vector<std::byte> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto u = std::bit_cast<std::uint32_t>(values[i]);
    for (std::size_t b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<std::byte>((u >> (8 * b)) & 0xffu);
  }
  return bytes;
}

std::vector<float> from_le_bytes(std::span<const std::byte> bytes) {
  std::vector<float> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t u = 0;
    for (std::size_t b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
    values[i] = std::bit_cast<float>(u);
  }
  return values;
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PersistenceError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct ParsedFile {
  WeightManifest manifest;
  std::string_view payload;
};

ParsedFile parse(const std::string& file, const std::filesystem::path& path) {
  const std::string magic = std::string(kMagic) + "\n";
  if (file.compare(0, magic.size(), magic) != 0) throw FormatError(path.string() + " is not a weight file");
  std::size_t pos = magic.size();
  const std::size_t eol = file.find('\n', pos);
  const std::string tag = "manifest-bytes ";
  if (eol == std::string::npos || file.compare(pos, tag.size(), tag) != 0) {
    throw FormatError(path.string() + ": missing manifest length line");
  }
  std::size_t manifest_bytes = 0;
  try {
    manifest_bytes = std::stoull(file.substr(pos + tag.size(), eol - pos - tag.size()));
  } catch (const std::exception&) {
    throw FormatError(path.string() + ": malformed manifest length");
  }
  pos = eol + 1;
  if (file.size() < pos + manifest_bytes) throw LengthError(path.string() + ": truncated manifest");

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(file.substr(pos, manifest_bytes));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": manifest is not valid JSON (" + e.what() + ")");
  }
  ParsedFile out;
  WeightManifest& m = out.manifest;
  try {
    m.version = j.at("version").get<int>();
    if (m.version != kWeightFormatVersion) {
      throw VersionError(path.string() + ": format version " + std::to_string(m.version) + ", this build reads " +
                         std::to_string(kWeightFormatVersion));
    }
    m.kind = j.at("kind").get<std::string>();
    m.trunk = layers_from_json(j.at("trunk"));
    if (j.contains("head")) m.head = layers_from_json(j.at("head"));
    m.side_dim = j.value("side_dim", std::size_t{0});
    m.param_count = j.at("param_count").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.crc32 = j.at("crc32").get<std::uint32_t>();
    m.extra = j.value("extra", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad manifest field (" + e.what() + ")");
  }
  out.payload = std::string_view(file).substr(pos + manifest_bytes);
  return out;
}

std::vector<float> checked_payload(const ParsedFile& f, const std::filesystem::path& path) {
  const std::size_t expected = f.manifest.param_count * 4;
  if (f.payload.size() != expected) {
    throw LengthError(path.string() + ": payload holds " + std::to_string(f.payload.size()) + " bytes, manifest declares " +
                      std::to_string(f.manifest.param_count) + " float32 values");
  }
  const std::span<const std::byte> bytes(reinterpret_cast<const std::byte*>(f.payload.data()), f.payload.size());
  if (crc32(bytes) != f.manifest.crc32) throw ChecksumError(path.string() + ": payload checksum mismatch");
  return from_le_bytes(bytes);
}

void write_file(const std::filesystem::path& path, WeightManifest m, std::span<const float> params) {
  const auto bytes = to_le_bytes(params);
  m.param_count = params.size();
  m.crc32 = crc32(bytes);
  const std::string manifest = m.to_json().dump(2) + "\n";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PersistenceError("cannot write " + path.string());
  out << kMagic << '\n' << "manifest-bytes " << manifest.size() << '\n' << manifest;
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw PersistenceError("short write to " + path.string());
}

std::size_t count_params(const std::vector<diffnet::LayerSpec>& layers) {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.param_count();
  return n;
}

}  // namespace

std::uint32_t crc32(std::span<const std::byte> bytes) {
  uLong c = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    c = ::crc32(c, reinterpret_cast<const Bytef*>(bytes.data() + off), static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(c);
}

nlohmann::json WeightManifest::to_json() const {
  nlohmann::json j;
  j["format"] = kMagic;
  j["version"] = version;
  j["kind"] = kind;
  j["trunk"] = layers_json(trunk);
  if (kind == "fused") {
    j["head"] = layers_json(head);
    j["side_dim"] = side_dim;
  }
  j["param_count"] = param_count;
  j["seed"] = seed;
  j["crc32"] = crc32;
  j["extra"] = extra;
  return j;
}

void save_network(const std::filesystem::path& path, const diffnet::Network& net, std::uint64_t seed,
                  const nlohmann::json& extra) {
  WeightManifest m;
  m.kind = "network";
  m.trunk = net.layers();
  m.seed = seed;
  m.extra = extra;
  write_file(path, m, net.params());
}

diffnet::Network load_network(const std::filesystem::path& path) {
  const std::string file = read_all(path);
  const ParsedFile f = parse(file, path);
  if (f.manifest.kind != "network") throw FormatError(path.string() + " holds a " + f.manifest.kind + " net");
  if (count_params(f.manifest.trunk) != f.manifest.param_count) {
    throw LengthError(path.string() + ": layer descriptors imply a different parameter count");
  }
  const auto values = checked_payload(f, path);
  diffnet::Network net(f.manifest.trunk);
  net.set_params(values);
  return net;
}

void save_fused(const std::filesystem::path& path, const diffnet::FusedNet& net, std::uint64_t seed,
                const nlohmann::json& extra) {
  WeightManifest m;
  m.kind = "fused";
  m.trunk = net.trunk().layers();
  m.head = net.head().layers();
  m.side_dim = net.side_dim();
  m.seed = seed;
  m.extra = extra;
  const Eigen::VectorXf p = net.params();
  write_file(path, m, std::span<const float>(p.data(), static_cast<std::size_t>(p.size())));
}

diffnet::FusedNet load_fused(const std::filesystem::path& path, WeightManifest* manifest) {
  const std::string file = read_all(path);
  const ParsedFile f = parse(file, path);
  if (f.manifest.kind != "fused") throw FormatError(path.string() + " holds a " + f.manifest.kind + " net");
  if (count_params(f.manifest.trunk) + count_params(f.manifest.head) != f.manifest.param_count) {
    throw LengthError(path.string() + ": layer descriptors imply a different parameter count");
  }
  const auto values = checked_payload(f, path);
  diffnet::FusedNet net(diffnet::Network(f.manifest.trunk), diffnet::Network(f.manifest.head), f.manifest.side_dim);
  net.set_params(values);
  if (manifest != nullptr) *manifest = f.manifest;
  return net;
}

void save_predictor(const std::filesystem::path& path, const predictor::Predictor& model, std::uint64_t seed) {
  nlohmann::json extra{{"role", "predictor"},
                       {"prediction_dim", model.layout.prediction_dim},
                       {"gaussian", model.layout.gaussian},
                       {"residual", model.layout.residual}};
  save_fused(path, model.net, seed, extra);
}

predictor::Predictor load_predictor(const std::filesystem::path& path) {
  WeightManifest m;
  diffnet::FusedNet net = load_fused(path, &m);
  predictor::PredictorLayout layout;
  try {
    layout.prediction_dim = m.extra.at("prediction_dim").get<std::size_t>();
    layout.gaussian = m.extra.at("gaussian").get<bool>();
    layout.residual = m.extra.at("residual").get<bool>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(path.string() + ": manifest lacks the predictor layout");
  }
  const std::size_t want = layout.gaussian ? 2 * layout.prediction_dim : layout.prediction_dim;
  if (net.output_dim() != want) throw FormatError(path.string() + ": predictor layout does not match the head");
  return {std::move(net), layout};
}

WeightManifest read_weight_manifest(const std::filesystem::path& path) {
  const std::string file = read_all(path);
  return parse(file, path).manifest;
}

}  // namespace affordmap::persistence
