#pragma once

// RWF1 field files.  Little-endian layout:
//   "RWF1" | u32 version=1 | u32 nt | u32 nx | f64 x0 | f64 dx | f64 t0 |
//   f64 dt_record | f64 eps | f64 mu | u8 payload_kind | payload
// payload_kind 0: nt*nx f64 amplitudes, 1: nt*nx (re, im) f64 pairs; both row-major.
// eps and mu are NaN when the field does not come from Gaussian data.

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "rogue/nlse.hpp"

namespace rogue::io {

enum class PayloadKind : std::uint8_t { Amplitude = 0, Complex = 1 };

inline constexpr std::uint32_t kRwf1Version = 1;
inline constexpr std::size_t kRwf1HeaderBytes = 65;

struct FieldFile {
  nlse::AmplitudeMatrix amplitude;  // |u| also for complex payloads
  PayloadKind kind = PayloadKind::Amplitude;
  std::vector<nlse::cplx> complex_rows;  // only for complex payloads
};

void write_rwf1(const std::filesystem::path& path, const nlse::AmplitudeMatrix& m);
// complex_rows must hold m.nt * m.nx values.
void write_rwf1_complex(const std::filesystem::path& path, const nlse::AmplitudeMatrix& m,
                        const std::vector<nlse::cplx>& complex_rows);

// Throws FormatError on a bad magic, version, truncation or trailing bytes.
FieldFile read_rwf1(const std::filesystem::path& path);

// Header fields as JSON; NaN eps/mu become null.
nlohmann::json header_json(const nlse::AmplitudeMatrix& m, PayloadKind kind);

// Header fields plus solver settings and conservation diagnostics.
nlohmann::json run_sidecar(const nlse::AmplitudeMatrix& m, PayloadKind kind,
                           const nlse::SimGrid& grid, const nlse::RecordOptions& rec,
                           const nlse::RunDiagnostics& diag);

// Sidecar next to a field file: "<field>.json".
std::filesystem::path sidecar_path(const std::filesystem::path& field);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace rogue::io
