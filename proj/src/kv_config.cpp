#include "magnav/kv_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace magnav {
namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double_or_throw(const std::string& tok, int line) {
  double v;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v))
    throw ParseError(line, "invalid number '" + tok + "'");
  return v;
}

std::uint64_t parse_u64_or_throw(const std::string& tok, int line) {
  std::uint64_t v;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError(line, "invalid unsigned integer '" + tok + "'");
  return v;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t next = s.find(',', pos);
    if (next == std::string::npos) {
      out.push_back(trim(s.substr(pos)));
      return out;
    }
    out.push_back(trim(s.substr(pos, next - pos)));
    pos = next + 1;
  }
}

}  // namespace

std::vector<KvEntry> parse_kv(const std::string& text) {
  std::vector<KvEntry> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ParseError(line_no, "expected key=value, got '" + stripped + "'");
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "empty key");
    out.push_back({key, value, line_no});
  }
  return out;
}

SynthSpec parse_synth_spec(const std::string& text) {
  SynthSpec spec;
  bool have_extent[4] = {false, false, false, false};
  bool have_spacing = false;
  for (const KvEntry& e : parse_kv(text)) {
    if (e.key == "x_min") {
      spec.x_min = parse_double_or_throw(e.value, e.line);
      have_extent[0] = true;
    } else if (e.key == "x_max") {
      spec.x_max = parse_double_or_throw(e.value, e.line);
      have_extent[1] = true;
    } else if (e.key == "y_min") {
      spec.y_min = parse_double_or_throw(e.value, e.line);
      have_extent[2] = true;
    } else if (e.key == "y_max") {
      spec.y_max = parse_double_or_throw(e.value, e.line);
      have_extent[3] = true;
    } else if (e.key == "spacing") {
      spec.spacing = parse_double_or_throw(e.value, e.line);
      have_spacing = true;
    } else if (e.key == "base_field") {
      spec.base_field = parse_double_or_throw(e.value, e.line);
    } else if (e.key == "seed") {
      spec.seed = parse_u64_or_throw(e.value, e.line);
    } else if (e.key == "anomaly") {
      std::vector<std::string> parts = split_commas(e.value);
      if (parts.size() != 4)
        throw ParseError(e.line, "anomaly needs cx,cy,amplitude,length_scale");
      Anomaly a;
      a.center_x = parse_double_or_throw(parts[0], e.line);
      a.center_y = parse_double_or_throw(parts[1], e.line);
      a.amplitude = parse_double_or_throw(parts[2], e.line);
      a.length_scale = parse_double_or_throw(parts[3], e.line);
      spec.anomalies.push_back(a);
    } else {
      throw ParseError(e.line, "unknown key '" + e.key + "'");
    }
  }
  if (!have_extent[0] || !have_extent[1] || !have_extent[2] || !have_extent[3] ||
      !have_spacing)
    throw ParseError(1, "synth spec needs x_min, x_max, y_min, y_max and spacing");
  spec.validate();
  return spec;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw std::runtime_error("read failure: " + path.string());
  return buf.str();
}

void write_text_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open file for writing: " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("write failure: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("rename failure writing " + path.string());
  }
}

}  // namespace magnav
