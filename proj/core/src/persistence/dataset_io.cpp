#include "affordmap/persistence/dataset_io.hpp"

#include <bit>
#include <fstream>
#include <string>

namespace affordmap::persistence {

namespace {

constexpr const char* kMagic = "affordmap-dataset";

void put_f32(std::string& buf, float v) {
  const auto u = std::bit_cast<std::uint32_t>(v);
  for (int b = 0; b < 4; ++b) buf.push_back(static_cast<char>((u >> (8 * b)) & 0xffu));
}

float get_f32(const char* p) {
  std::uint32_t u = 0;
  for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  return std::bit_cast<float>(u);
}

std::string header_block(const DatasetHeader& h) {
  std::string block = std::string(kMagic) + "\n" + h.to_json().dump() + "\n";
  if (block.size() > kDatasetHeaderBytes) throw FormatError("dataset header does not fit its fixed block");
  block.resize(kDatasetHeaderBytes - 1, ' ');
  block.push_back('\n');
  return block;
}

std::string encode(const std::vector<predictor::Transition>& records, std::size_t sensor_dim, std::size_t action_dim) {
  std::string buf;
  buf.reserve(records.size() * (4 * (2 * sensor_dim + action_dim) + 4));
  for (const auto& t : records) {
    if (static_cast<std::size_t>(t.s.size()) != sensor_dim || static_cast<std::size_t>(t.s_next.size()) != sensor_dim ||
        static_cast<std::size_t>(t.a.size()) != action_dim) {
      throw SchemaError("record dimensions differ from the dataset schema");
    }
    for (Eigen::Index i = 0; i < t.s.size(); ++i) put_f32(buf, t.s[i]);
    for (Eigen::Index i = 0; i < t.a.size(); ++i) put_f32(buf, t.a[i]);
    for (Eigen::Index i = 0; i < t.s_next.size(); ++i) put_f32(buf, t.s_next[i]);
    buf.push_back(static_cast<char>(t.provenance));
    buf.append(3, '\0');
  }
  return buf;
}

DatasetHeader parse_header(std::istream& in, const std::filesystem::path& path) {
  std::string block(kDatasetHeaderBytes, '\0');
  in.read(block.data(), static_cast<std::streamsize>(block.size()));
  if (static_cast<std::size_t>(in.gcount()) != kDatasetHeaderBytes) {
    throw LengthError(path.string() + ": truncated dataset header");
  }
  const std::string magic = std::string(kMagic) + "\n";
  if (block.compare(0, magic.size(), magic) != 0) throw FormatError(path.string() + " is not a dataset file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(block.substr(magic.size()));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": header is not valid JSON (" + e.what() + ")");
  }
  DatasetHeader h;
  try {
    h.version = j.at("version").get<int>();
    if (h.version != kDatasetFormatVersion) {
      throw VersionError(path.string() + ": dataset format version " + std::to_string(h.version));
    }
    h.sensor_dim = j.at("sensor_dim").get<std::size_t>();
    h.action_dim = j.at("action_dim").get<std::size_t>();
    h.count = j.at("count").get<std::size_t>();
    h.validation_fraction = j.at("validation_fraction").get<double>();
    h.split_seed = j.at("split_seed").get<std::uint64_t>();
    if (j.at("record_bytes").get<std::size_t>() != h.record_bytes()) {
      throw SchemaError(path.string() + ": record width disagrees with the declared dimensions");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad header field (" + e.what() + ")");
  }
  return h;
}

void check_length(const std::filesystem::path& path, const DatasetHeader& h) {
  const auto size = std::filesystem::file_size(path);
  const auto want = kDatasetHeaderBytes + h.count * h.record_bytes();
  if (size != want) {
    throw LengthError(path.string() + ": file has " + std::to_string(size) + " bytes, header implies " +
                      std::to_string(want));
  }
}

}  // namespace

nlohmann::json DatasetHeader::to_json() const {
  return {{"format", kMagic},
          {"version", version},
          {"sensor_dim", sensor_dim},
          {"action_dim", action_dim},
          {"count", count},
          {"record_bytes", record_bytes()},
          {"record_layout", "s[sensor_dim] a[action_dim] s_next[sensor_dim] float32le, provenance u8, pad u8[3]"},
          {"provenance", {{"0", "random"}, {"1", "proposer"}}},
          {"validation_fraction", validation_fraction},
          {"split_seed", split_seed}};
}

void save_dataset(const std::filesystem::path& path, const predictor::ExperienceDataset& data) {
  DatasetHeader h;
  h.sensor_dim = data.sensor_dim();
  h.action_dim = data.action_dim();
  h.count = data.size();
  h.validation_fraction = data.validation_fraction();
  h.split_seed = data.split_seed();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PersistenceError("cannot write " + path.string());
  out << header_block(h);
  const std::string payload = encode(data.records(), h.sensor_dim, h.action_dim);
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw PersistenceError("short write to " + path.string());
}

DatasetHeader read_dataset_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PersistenceError("cannot open " + path.string());
  return parse_header(in, path);
}

predictor::ExperienceDataset load_dataset(const std::filesystem::path& path, std::size_t expected_sensor_dim,
                                          std::size_t expected_action_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PersistenceError("cannot open " + path.string());
  const DatasetHeader h = parse_header(in, path);
  if ((expected_sensor_dim != 0 && expected_sensor_dim != h.sensor_dim) ||
      (expected_action_dim != 0 && expected_action_dim != h.action_dim)) {
    throw SchemaError(path.string() + ": file declares sensor/action dims " + std::to_string(h.sensor_dim) + "/" +
                      std::to_string(h.action_dim) + ", expected " + std::to_string(expected_sensor_dim) + "/" +
                      std::to_string(expected_action_dim));
  }
  check_length(path, h);

  predictor::ExperienceDataset data(h.sensor_dim, h.action_dim, h.validation_fraction, h.split_seed);
  const auto s = static_cast<Eigen::Index>(h.sensor_dim);
  const auto a = static_cast<Eigen::Index>(h.action_dim);
  std::string rec(h.record_bytes(), '\0');
  for (std::size_t i = 0; i < h.count; ++i) {
    in.read(rec.data(), static_cast<std::streamsize>(rec.size()));
    if (static_cast<std::size_t>(in.gcount()) != rec.size()) throw LengthError(path.string() + ": truncated record");
    predictor::Transition t;
    t.s.resize(s);
    t.a.resize(a);
    t.s_next.resize(s);
    const char* p = rec.data();
    for (Eigen::Index k = 0; k < s; ++k, p += 4) t.s[k] = get_f32(p);
    for (Eigen::Index k = 0; k < a; ++k, p += 4) t.a[k] = get_f32(p);
    for (Eigen::Index k = 0; k < s; ++k, p += 4) t.s_next[k] = get_f32(p);
    const auto tag = static_cast<unsigned char>(*p);
    if (tag > 1) throw FormatError(path.string() + ": unknown provenance tag " + std::to_string(tag));
    t.provenance = static_cast<predictor::Provenance>(tag);
    data.append(std::move(t));
  }
  return data;
}

void append_dataset(const std::filesystem::path& path, const std::vector<predictor::Transition>& records) {
  DatasetHeader h = read_dataset_header(path);
  check_length(path, h);
  const std::string payload = encode(records, h.sensor_dim, h.action_dim);
  {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw PersistenceError("cannot append to " + path.string());
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw PersistenceError("short write to " + path.string());
  }
  h.count += records.size();
  std::fstream io(path, std::ios::binary | std::ios::in | std::ios::out);
  io.seekp(0);
  io << header_block(h);
  if (!io) throw PersistenceError("cannot update header of " + path.string());
}

}  // namespace affordmap::persistence
