#pragma once

// Binary parameter files.
//
//   offset 0   8 bytes   magic tag (ASCII, model specific)
//          8   u32 LE    format version
//         12   u64 LE    header length N
//         20   N bytes   UTF-8 JSON header; "fields" lists {name, shape} in
//                        storage order, other keys are model metadata
//       20+N   f64 LE    values of every field, in manifest order, row-major

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "scidraft/numerics/tape.hpp"

namespace scidraft::numerics {

void write_parameter_file(std::ostream& out, std::string_view magic, std::uint32_t version,
                          nlohmann::json header, std::span<const Parameter* const> params);

class ParameterFileReader {
 public:
  // Reads and validates the preamble and header; throws DataError.
  ParameterFileReader(std::istream& in, std::string_view magic, std::uint32_t version);

  const nlohmann::json& header() const noexcept { return header_; }

  // Reads the value block; params must match the manifest by name and shape.
  void read_values(std::span<Parameter* const> params);

 private:
  std::istream& in_;
  nlohmann::json header_;
};

}  // namespace scidraft::numerics
