#include "rogue/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "rogue/errors.hpp"

namespace rogue::io {
namespace {

template <typename T>
void put(std::vector<char>& buf, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  buf.insert(buf.end(), bytes, bytes + sizeof(T));
}

template <typename T>
T get(const std::vector<char>& buf, std::size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw FormatError("RWF1 file is truncated");
  char bytes[sizeof(T)];
  std::memcpy(bytes, buf.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  pos += sizeof(T);
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

std::uint32_t checked_u32(std::size_t n, const char* what) {
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError(std::string(what) + " does not fit the RWF1 header");
  }
  return static_cast<std::uint32_t>(n);
}

std::vector<char> header(const nlse::AmplitudeMatrix& m, PayloadKind kind) {
  m.validate();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<char> buf{'R', 'W', 'F', '1'};
  put(buf, kRwf1Version);
  put(buf, checked_u32(m.nt, "nt"));
  put(buf, checked_u32(m.nx, "nx"));
  put(buf, m.x0);
  put(buf, m.dx);
  put(buf, m.t0);
  put(buf, m.dt_record);
  put(buf, m.params ? m.params->eps : nan);
  put(buf, m.params ? m.params->mu : nan);
  put(buf, static_cast<std::uint8_t>(kind));
  return buf;
}

void write_bytes(const std::filesystem::path& path, const std::vector<char>& buf) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw std::runtime_error("write to " + path.string() + " failed");
}

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

void write_rwf1(const std::filesystem::path& path, const nlse::AmplitudeMatrix& m) {
  auto buf = header(m, PayloadKind::Amplitude);
  buf.reserve(buf.size() + m.a.size() * sizeof(double));
  for (double v : m.a) put(buf, v);
  write_bytes(path, buf);
}

void write_rwf1_complex(const std::filesystem::path& path, const nlse::AmplitudeMatrix& m,
                        const std::vector<nlse::cplx>& complex_rows) {
  if (complex_rows.size() != m.nt * m.nx) {
    throw ValidationError("complex payload size does not match nt * nx");
  }
  auto buf = header(m, PayloadKind::Complex);
  buf.reserve(buf.size() + complex_rows.size() * 2 * sizeof(double));
  for (const auto& z : complex_rows) {
    put(buf, z.real());
    put(buf, z.imag());
  }
  write_bytes(path, buf);
}

FieldFile read_rwf1(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open field file " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (buf.size() < 4 || std::memcmp(buf.data(), "RWF1", 4) != 0) {
    throw FormatError(path.string() + " is not an RWF1 field file");
  }
  std::size_t pos = 4;
  const auto version = get<std::uint32_t>(buf, pos);
  if (version != kRwf1Version) {
    throw FormatError("unsupported RWF1 version " + std::to_string(version));
  }
  FieldFile f;
  auto& m = f.amplitude;
  m.nt = get<std::uint32_t>(buf, pos);
  m.nx = get<std::uint32_t>(buf, pos);
  m.x0 = get<double>(buf, pos);
  m.dx = get<double>(buf, pos);
  m.t0 = get<double>(buf, pos);
  m.dt_record = get<double>(buf, pos);
  const double eps = get<double>(buf, pos);
  const double mu = get<double>(buf, pos);
  if (std::isfinite(eps) && std::isfinite(mu)) m.params = nlse::GaussParams{eps, mu};
  const auto kind = get<std::uint8_t>(buf, pos);
  if (kind > 1) throw FormatError("unknown RWF1 payload kind " + std::to_string(kind));
  f.kind = static_cast<PayloadKind>(kind);

  const std::size_t cells = m.nt * m.nx;
  const std::size_t per = f.kind == PayloadKind::Amplitude ? 1 : 2;
  if (buf.size() - pos != cells * per * sizeof(double)) {
    throw FormatError("RWF1 payload size does not match the header (" + path.string() + ")");
  }
  m.a.resize(cells);
  if (f.kind == PayloadKind::Amplitude) {
    for (auto& v : m.a) v = get<double>(buf, pos);
  } else {
    f.complex_rows.resize(cells);
    for (std::size_t k = 0; k < cells; ++k) {
      const double re = get<double>(buf, pos);
      const double im = get<double>(buf, pos);
      f.complex_rows[k] = {re, im};
      m.a[k] = std::abs(f.complex_rows[k]);
    }
  }
  try {
    m.validate();
  } catch (const ValidationError& e) {
    throw FormatError(std::string("RWF1 header is inconsistent: ") + e.what());
  }
  return f;
}

nlohmann::json header_json(const nlse::AmplitudeMatrix& m, PayloadKind kind) {
  nlohmann::json j;
  j["format"] = "RWF1";
  j["version"] = kRwf1Version;
  j["nt"] = m.nt;
  j["nx"] = m.nx;
  j["x0"] = m.x0;
  j["dx"] = m.dx;
  j["t0"] = m.t0;
  j["dt_record"] = m.dt_record;
  j["eps"] = m.params ? finite_or_null(m.params->eps) : nlohmann::json(nullptr);
  j["mu"] = m.params ? finite_or_null(m.params->mu) : nlohmann::json(nullptr);
  j["payload_kind"] = static_cast<int>(kind);
  return j;
}

nlohmann::json run_sidecar(const nlse::AmplitudeMatrix& m, PayloadKind kind,
                           const nlse::SimGrid& grid, const nlse::RecordOptions& rec,
                           const nlse::RunDiagnostics& diag) {
  auto j = header_json(m, kind);
  j["solver"] = {{"scheme", "if-rk4"},
                 {"length", grid.length},
                 {"nx", grid.nx},
                 {"dt", grid.dt},
                 {"t_max", grid.t_max},
                 {"record_every", rec.record_every},
                 {"dealias", rec.solver.dealias}};
  j["diagnostics"] = {{"steps", diag.steps},
                      {"mass_initial", diag.initial.mass},
                      {"mass_final", diag.final.mass},
                      {"energy_initial", diag.initial.energy},
                      {"energy_final", diag.final.energy},
                      {"mass_drift", finite_or_null(diag.mass_drift())},
                      {"energy_drift", finite_or_null(diag.energy_drift())},
                      {"warnings", diag.warnings}};
  return j;
}

std::filesystem::path sidecar_path(const std::filesystem::path& field) {
  auto p = field;
  p += ".json";
  return p;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw std::runtime_error("write to " + path.string() + " failed");
}

}  // namespace rogue::io
