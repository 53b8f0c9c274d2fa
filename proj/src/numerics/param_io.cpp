#include "scidraft/numerics/param_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <vector>

#include "scidraft/error.hpp"

namespace scidraft::numerics {

namespace {

constexpr std::size_t kMagicLength = 8;

template <class T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <class T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw DataError("parameter file truncated");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

std::string padded_magic(std::string_view magic) {
  std::string tag(magic.substr(0, kMagicLength));
  tag.resize(kMagicLength, ' ');
  return tag;
}

}  // namespace

void write_parameter_file(std::ostream& out, std::string_view magic, std::uint32_t version,
                          nlohmann::json header, std::span<const Parameter* const> params) {
  nlohmann::json fields = nlohmann::json::array();
  for (const Parameter* p : params) fields.push_back({{"name", p->name}, {"shape", p->value.shape()}});
  header["fields"] = std::move(fields);
  const std::string text = header.dump();

  const std::string tag = padded_magic(magic);
  out.write(tag.data(), tag.size());
  put_le<std::uint32_t>(out, version);
  put_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const Parameter* p : params) {
    for (double v : p->value.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw std::runtime_error("failed writing parameter file");
}

ParameterFileReader::ParameterFileReader(std::istream& in, std::string_view magic, std::uint32_t version)
    : in_(in) {
  std::string tag(kMagicLength, '\0');
  in_.read(tag.data(), kMagicLength);
  if (!in_ || tag != padded_magic(magic)) {
    throw DataError("not a '" + std::string(magic) + "' parameter file");
  }
  const auto file_version = get_le<std::uint32_t>(in_);
  if (file_version != version) {
    throw DataError("unsupported parameter file version " + std::to_string(file_version) + " (expected " +
                    std::to_string(version) + ")");
  }
  const auto length = get_le<std::uint64_t>(in_);
  std::string text(length, '\0');
  in_.read(text.data(), static_cast<std::streamsize>(length));
  if (!in_) throw DataError("parameter file header truncated");
  try {
    header_ = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("parameter file header is not valid JSON: ") + e.what());
  }
  if (!header_.contains("fields") || !header_["fields"].is_array()) {
    throw DataError("parameter file header lacks a field manifest");
  }
}

void ParameterFileReader::read_values(std::span<Parameter* const> params) {
  const auto& fields = header_["fields"];
  if (fields.size() != params.size()) {
    throw DataError("parameter file lists " + std::to_string(fields.size()) + " fields, model expects " +
                    std::to_string(params.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    const std::string name = fields[k].at("name").get<std::string>();
    const Shape shape = fields[k].at("shape").get<Shape>();
    if (name != p.name || shape != p.value.shape()) {
      throw DataError("parameter field " + std::to_string(k) + " is " + name + shape_to_string(shape) +
                      ", model expects " + p.name + shape_to_string(p.value.shape()));
    }
    for (double& v : p.value.data()) v = std::bit_cast<double>(get_le<std::uint64_t>(in_));
    p.zero_grad();
  }
}

}  // namespace scidraft::numerics
