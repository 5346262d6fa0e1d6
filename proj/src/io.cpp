#include "kinklab/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace kinklab {

namespace {

// The process never calls setlocale, so printf uses the C locale and the
// decimal separator is a dot everywhere.
std::string printf_g(double v, int prec) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

void ensure_le(std::vector<double>& vals) {
  if constexpr (std::endian::native == std::endian::big) {
    for (double& d : vals) {
      uint64_t u;
      std::memcpy(&u, &d, 8);
      u = __builtin_bswap64(u);
      std::memcpy(&d, &u, 8);
    }
  }
}

void append_doubles(std::ofstream& out, std::vector<double> vals) {
  ensure_le(vals);
  out.write(reinterpret_cast<const char*>(vals.data()),
            static_cast<std::streamsize>(vals.size() * sizeof(double)));
}

std::vector<double> slice_doubles(const std::string& bytes, size_t offset,
                                  size_t count) {
  std::vector<double> out(count);
  std::memcpy(out.data(), bytes.data() + offset * sizeof(double),
              count * sizeof(double));
  ensure_le(out);
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

} // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  for (int prec = 1; prec <= 16; ++prec) {
    std::string s = printf_g(v, prec);
    if (std::strtod(s.c_str(), nullptr) == v) return s;
  }
  return printf_g(v, 17);
}

std::string fnv1a_hex(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

DiagnosticsCsvWriter::DiagnosticsCsvWriter(const std::string& path) {
  f_ = std::fopen(path.c_str(), "wb");
  if (!f_) throw std::runtime_error("cannot open '" + path + "' for writing");
  std::fputs("t,sup_u,sup_v,H2_v,L2_xv,H1Lv_proxy,energy,parity_drift,boundary_leak\n",
             f_);
}

DiagnosticsCsvWriter::~DiagnosticsCsvWriter() {
  if (f_) std::fclose(f_);
}

void DiagnosticsCsvWriter::write(const DiagnosticsRecord& r) {
  std::string line = format_double(r.t);
  for (double v : {r.sup_u, r.sup_v, r.H2_v, r.L2_xv, r.H1Lv_proxy, r.energy,
                   r.parity_drift, r.boundary_leak}) {
    line += ',';
    line += format_double(v);
  }
  line += '\n';
  std::fputs(line.c_str(), f_);
  std::fflush(f_);
}

void write_state_pair(const std::string& dir, const std::string& stem,
                      const SimState& s) {
  const fs::path base = fs::path(dir) / stem;
  {
    std::ofstream bin(base.string() + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot write " + base.string() + ".bin");
    append_doubles(bin, s.u.values);
    append_doubles(bin, s.ut.values);
  }
  json side;
  side["t"] = s.t;
  side["n"] = s.grid->n;
  side["half_length"] = s.grid->half_length;
  side["endianness"] = "little";
  side["bytes_per_float"] = 8;
  side["arrays"] = {"u", "ut"};
  std::ofstream js(base.string() + ".json", std::ios::binary);
  if (!js) throw std::runtime_error("cannot write " + base.string() + ".json");
  js << side.dump(2) << "\n";
}

std::vector<LoadedSnapshot> load_snapshots(const std::string& dir) {
  std::vector<LoadedSnapshot> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("snapshot_", 0) != 0 || entry.path().extension() != ".json")
      continue;
    std::ifstream js(entry.path(), std::ios::binary);
    json side = json::parse(js);
    LoadedSnapshot snap;
    snap.t = side.at("t").get<double>();
    snap.n = side.at("n").get<int>();
    snap.half_length = side.at("half_length").get<double>();

    fs::path binp = entry.path();
    binp.replace_extension(".bin");
    std::ifstream bin(binp, std::ios::binary);
    if (!bin)
      throw std::runtime_error("snapshot payload missing: " + binp.string());
    std::ostringstream buf;
    buf << bin.rdbuf();
    const std::string bytes = buf.str();
    const size_t want = 2u * static_cast<size_t>(snap.n) * sizeof(double);
    if (bytes.size() != want)
      throw std::runtime_error("snapshot payload size mismatch: " + binp.string());
    snap.u = slice_doubles(bytes, 0, static_cast<size_t>(snap.n));
    snap.ut = slice_doubles(bytes, static_cast<size_t>(snap.n),
                            static_cast<size_t>(snap.n));
    out.push_back(std::move(snap));
  }
  std::sort(out.begin(), out.end(),
            [](const LoadedSnapshot& a, const LoadedSnapshot& b) { return a.t < b.t; });
  return out;
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::string& dir, const RunManifest& m) {
  if (m.status == "ok") {
    for (const std::string& name : m.outputs)
      if (!fs::exists(fs::path(dir) / name))
        throw std::logic_error("manifest lists missing output: " + name);
  }
  json doc;
  doc["config_hash"] = m.config_hash;
  doc["config"] = json::parse(m.config_json);
  doc["code_version"] = m.code_version;
  doc["started_utc"] = m.started_utc;
  doc["finished_utc"] = m.finished_utc;
  doc["status"] = m.status;
  if (!m.abort_message.empty()) doc["abort_message"] = m.abort_message;
  doc["outputs"] = m.outputs;
  json checks = json::array();
  for (const CheckResult& c : m.checks) {
    checks.push_back({{"name", c.name},
                      {"measured", c.measured},
                      {"tolerance", c.tolerance},
                      {"passed", c.passed}});
  }
  doc["checks"] = checks;
  std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest.json in " + dir);
  out << doc.dump(2) << "\n";
}

RunManifest read_manifest(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "manifest.json", std::ios::binary);
  if (!in) throw std::runtime_error("no manifest.json in " + dir);
  json doc = json::parse(in);
  RunManifest m;
  m.config_hash = doc.at("config_hash").get<std::string>();
  m.config_json = doc.at("config").dump(2) + "\n";
  m.code_version = doc.at("code_version").get<std::string>();
  m.started_utc = doc.at("started_utc").get<std::string>();
  m.finished_utc = doc.at("finished_utc").get<std::string>();
  m.status = doc.at("status").get<std::string>();
  if (doc.contains("abort_message"))
    m.abort_message = doc["abort_message"].get<std::string>();
  for (const json& s : doc.at("outputs")) m.outputs.push_back(s.get<std::string>());
  for (const json& c : doc.at("checks")) {
    CheckResult r;
    r.name = c.at("name").get<std::string>();
    r.measured = c.at("measured").get<double>();
    r.tolerance = c.at("tolerance").get<double>();
    r.passed = c.at("passed").get<bool>();
    m.checks.push_back(std::move(r));
  }
  return m;
}

// ---------------------------------------------------------------------------
// SVG plotting.

namespace {

struct AxisScale {
  double lo = 0.0, hi = 1.0;
  bool logscale = false;

  double place(double v, double px_lo, double px_hi) const {
    double t = logscale ? (std::log10(v) - lo) / (hi - lo) : (v - lo) / (hi - lo);
    return px_lo + t * (px_hi - px_lo);
  }
};

bool usable(double x, double y, bool logx, bool logy) {
  if (!std::isfinite(x) || !std::isfinite(y)) return false;
  if (logx && x <= 0.0) return false;
  if (logy && y <= 0.0) return false;
  return true;
}

AxisScale make_scale(double lo, double hi, bool logscale) {
  AxisScale s;
  s.logscale = logscale;
  if (logscale) {
    lo = std::log10(lo);
    hi = std::log10(hi);
  }
  if (!(hi > lo)) {
    const double pad = std::max(0.5, std::abs(lo) * 0.1);
    lo -= pad;
    hi += pad;
  } else {
    const double pad = 0.04 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  s.lo = lo;
  s.hi = hi;
  return s;
}

// Tick positions in scale coordinates (log10 units on log axes).
std::vector<double> make_ticks(const AxisScale& s) {
  std::vector<double> out;
  const double span = s.hi - s.lo;
  double step = std::pow(10.0, std::floor(std::log10(span / 5.0)));
  const double r = span / 5.0 / step;
  if (r > 5.0) step *= 10.0;
  else if (r > 2.0) step *= 5.0;
  else if (r > 1.0) step *= 2.0;
  if (s.logscale && span > 2.5) step = std::max(1.0, std::round(step));
  for (double v = std::ceil(s.lo / step) * step; v <= s.hi + 1e-12 * span; v += step)
    out.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
  return out;
}

std::string tick_label(double v, bool logscale) {
  return format_double(logscale ? std::pow(10.0, v) : v).substr(0, 10);
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

} // namespace

void write_svg_plot(const std::string& path, const PlotSpec& spec) {
  const double W = 900, H = 600, ml = 76, mr = 24, mt = 46, mb = 58;

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const PlotSeries& s : spec.series) {
    const size_t npt = std::min(s.x.size(), s.y.size());
    for (size_t i = 0; i < npt; ++i) {
      if (!usable(s.x[i], s.y[i], spec.logx, spec.logy)) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  const bool empty = xmin > xmax;
  if (empty) {
    xmin = spec.logx ? 1.0 : 0.0;
    xmax = spec.logx ? 10.0 : 1.0;
    ymin = spec.logy ? 1.0 : 0.0;
    ymax = spec.logy ? 10.0 : 1.0;
  }
  AxisScale sx = make_scale(xmin, xmax, spec.logx);
  AxisScale sy = make_scale(ymin, ymax, spec.logy);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << W << " "
      << H << "\" font-family=\"sans-serif\" font-size=\"14\">\n";
  svg << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << W / 2 << "\" y=\"26\" text-anchor=\"middle\" font-size=\"17\">"
      << xml_escape(spec.title) << "</text>\n";

  auto px = [&](double v) { return sx.place(v, ml, W - mr); };
  auto py = [&](double v) { return sy.place(v, H - mb, mt); };

  // gridlines and tick labels
  svg << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (double tx : make_ticks(sx)) {
    const double X = sx.logscale ? px(std::pow(10.0, tx)) : px(tx);
    svg << "<line x1=\"" << X << "\" y1=\"" << mt << "\" x2=\"" << X << "\" y2=\""
        << H - mb << "\"/>\n";
  }
  for (double ty : make_ticks(sy)) {
    const double Y = sy.logscale ? py(std::pow(10.0, ty)) : py(ty);
    svg << "<line x1=\"" << ml << "\" y1=\"" << Y << "\" x2=\"" << W - mr
        << "\" y2=\"" << Y << "\"/>\n";
  }
  svg << "</g>\n<g fill=\"#333333\" font-size=\"12\">\n";
  for (double tx : make_ticks(sx)) {
    const double X = sx.logscale ? px(std::pow(10.0, tx)) : px(tx);
    svg << "<text x=\"" << X << "\" y=\"" << H - mb + 18
        << "\" text-anchor=\"middle\">" << tick_label(tx, sx.logscale) << "</text>\n";
  }
  for (double ty : make_ticks(sy)) {
    const double Y = sy.logscale ? py(std::pow(10.0, ty)) : py(ty);
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << Y + 4
        << "\" text-anchor=\"end\">" << tick_label(ty, sy.logscale) << "</text>\n";
  }
  svg << "</g>\n";

  // frame and axis titles
  svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
      << "\" height=\"" << H - mt - mb
      << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";
  svg << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 14
      << "\" text-anchor=\"middle\">" << xml_escape(spec.xlabel) << "</text>\n";
  svg << "<text x=\"20\" y=\"" << (mt + H - mb) / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << (mt + H - mb) / 2 << ")\">" << xml_escape(spec.ylabel) << "</text>\n";

  size_t ci = 0;
  for (const PlotSeries& s : spec.series) {
    const char* color = kPalette[ci % (sizeof kPalette / sizeof *kPalette)];
    std::ostringstream pts;
    const size_t npt = std::min(s.x.size(), s.y.size());
    size_t used = 0;
    for (size_t i = 0; i < npt; ++i) {
      if (!usable(s.x[i], s.y[i], spec.logx, spec.logy)) continue;
      char buf[48];
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
      pts << buf;
      ++used;
    }
    if (used >= 2) {
      svg << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.8\" points=\"" << pts.str() << "\"/>\n";
    } else if (used == 1) {
      // a lone point still deserves a mark
      svg << "<circle r=\"3\" fill=\"" << color << "\" cx=\""
          << pts.str().substr(0, pts.str().find(',')) << "\" cy=\""
          << pts.str().substr(pts.str().find(',') + 1) << "\"/>\n";
    }
    const double ly = mt + 20 + 18 * static_cast<double>(ci);
    svg << "<line x1=\"" << W - mr - 150 << "\" y1=\"" << ly << "\" x2=\""
        << W - mr - 126 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2.5\"/>\n";
    svg << "<text x=\"" << W - mr - 120 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">"
        << xml_escape(s.label) << "</text>\n";
    ++ci;
  }

  // embedded data block: the plot doubles as a machine-readable record
  std::ostringstream data;
  for (const PlotSeries& s : spec.series) {
    data << "series: " << s.label << "\n";
    const size_t npt = std::min(s.x.size(), s.y.size());
    for (size_t i = 0; i < npt; ++i)
      data << format_double(s.x[i]) << "," << format_double(s.y[i]) << "\n";
  }
  std::string blob = data.str();
  size_t pos = 0;
  while ((pos = blob.find("--", pos)) != std::string::npos) blob.replace(pos, 2, "- -");
  svg << "<!-- data\n" << blob << "-->\n</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << svg.str();
}

} // namespace kinklab
