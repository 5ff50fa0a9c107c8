#include "setdist/io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "setdist/error.hpp"

namespace setdist::io {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  return out;
}

double parse_real(const std::string& field, std::size_t line_no) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw InputError("line " + std::to_string(line_no) + ": '" + field + "' is not a number");
  }
  return v;
}

bool is_header(const std::vector<std::string>& fields) {
  return !fields.empty() && !fields.front().empty() &&
         std::isalpha(static_cast<unsigned char>(fields.front().front()));
}

QuadraticForm form_from_json(const nlohmann::json& j, double default_scale) {
  QuadraticForm v{j.value("v_scale", default_scale), std::nullopt};
  if (j.contains("V")) {
    const auto& rows = j.at("V");
    if (!rows.is_array() || rows.empty()) throw InputError("kernel V must be a square array");
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = rows[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
        throw InputError("kernel V must be a square array");
      }
      for (Eigen::Index k = 0; k < n; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
    v.matrix = std::move(m);
  }
  return v;
}

void form_to_json(const QuadraticForm& v, nlohmann::json& j) {
  if (v.matrix) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.matrix->rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index k = 0; k < v.matrix->cols(); ++k) row.push_back((*v.matrix)(i, k));
      rows.push_back(std::move(row));
    }
    j["V"] = std::move(rows);
  } else {
    j["v_scale"] = v.scale;
  }
}

// Next whitespace-delimited PGM header token, skipping '#' comments.
std::string pgm_token(std::string_view bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  if (start == pos) throw InputError("malformed PGM: truncated header");
  return std::string(bytes.substr(start, pos - start));
}

int pgm_int(std::string_view bytes, std::size_t& pos, const char* what) {
  const std::string tok = pgm_token(bytes, pos);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || v <= 0) {
    throw InputError(std::string("malformed PGM: bad ") + what + " '" + tok + "'");
  }
  return v;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw InputError("error while reading '" + path.string() + "'");
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw InputError("error while writing '" + path.string() + "'");
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return s;
}

std::vector<ConvexBody> read_bodies_csv(std::istream& in) {
  std::vector<ConvexBody> bodies;
  std::vector<Point> current;
  auto flush = [&] {
    if (!current.empty()) bodies.emplace_back(std::move(current));
    current.clear();
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      flush();
      continue;
    }
    const auto fields = split_commas(line);
    if (is_header(fields)) continue;
    if (fields.size() != 2) {
      throw InputError("line " + std::to_string(line_no) + ": expected 'x,y'");
    }
    current.push_back({parse_real(fields[0], line_no), parse_real(fields[1], line_no)});
  }
  flush();
  return bodies;
}

void write_bodies_csv(std::ostream& out, const std::vector<ConvexBody>& bodies) {
  out << "x,y\n";
  for (std::size_t b = 0; b < bodies.size(); ++b) {
    if (b > 0) out << '\n';
    for (const Point& p : bodies[b].vertices()) {
      out << format_real(p.x) << ',' << format_real(p.y) << '\n';
    }
  }
}

std::vector<ConvexBody> bodies_from_json(const nlohmann::json& j) {
  const nlohmann::json& list = j.is_object() ? j.at("bodies") : j;
  if (!list.is_array()) throw InputError("bodies must be an array of vertex lists");
  std::vector<ConvexBody> out;
  for (const auto& body : list) {
    std::vector<Point> vertices;
    for (const auto& v : body) {
      if (!v.is_array() || v.size() != 2) throw InputError("vertices must be [x, y] pairs");
      vertices.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    out.emplace_back(std::move(vertices));
  }
  return out;
}

std::vector<SupportVector> read_support_csv(std::istream& in) {
  std::vector<SupportVector> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (is_header(fields)) continue;
    SupportVector v;
    for (const auto& f : fields) v.values.push_back(parse_real(f, line_no));
    if (!rows.empty() && v.size() != rows.front().size()) {
      throw InputError("line " + std::to_string(line_no) + ": support vectors differ in length");
    }
    rows.push_back(std::move(v));
  }
  return rows;
}

void write_support_csv(std::ostream& out, const std::vector<SupportVector>& rows) {
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << format_real(row[i]);
    }
    out << '\n';
  }
}

KernelSpec kernel_from_json(const nlohmann::json& j) {
  try {
    if (j.is_string()) return kernel_from_json(nlohmann::json{{"kind", j.get<std::string>()}});
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "euclidean") return EuclideanPower{j.value("r", 1.0)};
    if (kind == "gaussian") return Gaussian{form_from_json(j, 10.0)};
    if (kind == "cauchy") return Cauchy{form_from_json(j, 1.0)};
    if (kind == "expweighted") {
      ExpWeighted k{{}, j.value("D", 3)};
      if (j.contains("w")) {
        const auto& w = j.at("w");
        if (w.is_array()) {
          k.w = w.get<std::vector<double>>();
        } else if (w.get<double>() != 1.0) {
          k.w = {w.get<double>()};
        }
      }
      return k;
    }
    if (kind == "radialpower") return RadialPower{j.value("r", 1.0), j.value("D", 3)};
    throw InputError("unknown kernel kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid kernel description: ") + e.what());
  }
}

nlohmann::json kernel_to_json(const KernelSpec& spec) {
  nlohmann::json j;
  j["kind"] = kernel_kind(spec);
  if (const auto* k = std::get_if<EuclideanPower>(&spec)) {
    j["r"] = k->r;
  } else if (const auto* k = std::get_if<Gaussian>(&spec)) {
    form_to_json(k->v, j);
  } else if (const auto* k = std::get_if<Cauchy>(&spec)) {
    form_to_json(k->v, j);
  } else if (const auto* k = std::get_if<ExpWeighted>(&spec)) {
    if (k->w.size() > 1) {
      j["w"] = k->w;
    } else {
      j["w"] = k->w.empty() ? 1.0 : k->w.front();
    }
    j["D"] = k->depth;
  } else if (const auto* k = std::get_if<RadialPower>(&spec)) {
    j["r"] = k->r;
    j["D"] = k->depth;
  }
  return j;
}

nlohmann::json result_to_json(const TestResult& r) {
  nlohmann::json j;
  j["method"] = to_string(r.method);
  j["statistic"] = r.statistic;
  j["p_value"] = r.p_value;
  j["replicates"] = r.replicates;
  j["seed"] = r.seed;
  j["kernel"] = kernel_to_json(r.kernel);
  j["metadata"] = r.metadata;
  j["warnings"] = r.warnings;
  return j;
}

std::string pgm_bytes(const RasterMask& mask) {
  std::string out = "P5\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) +
                    "\n255\n";
  out.reserve(out.size() + mask.bits.size());
  for (std::uint8_t b : mask.bits) out.push_back(static_cast<char>(b ? 255 : 0));
  return out;
}

RasterMask parse_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  const std::string magic = pgm_token(bytes, pos);
  if (magic != "P5" && magic != "P2") throw InputError("malformed PGM: unsupported magic '" + magic + "'");
  const int width = pgm_int(bytes, pos, "width");
  const int height = pgm_int(bytes, pos, "height");
  const int maxval = pgm_int(bytes, pos, "maxval");
  if (maxval > 65535) throw InputError("malformed PGM: maxval out of range");
  RasterMask mask(width, height);
  const std::size_t count = mask.bits.size();
  if (magic == "P5") {
    ++pos;  // single whitespace after maxval
    const std::size_t sample = maxval < 256 ? 1 : 2;
    if (bytes.size() < pos + count * sample) throw InputError("malformed PGM: truncated raster");
    for (std::size_t i = 0; i < count; ++i) {
      bool on = bytes[pos + i * sample] != 0;
      if (sample == 2) on = on || bytes[pos + i * sample + 1] != 0;
      mask.bits[i] = on ? 1 : 0;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const std::string tok = pgm_token(bytes, pos);
      int v = 0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 0 || v > maxval) {
        throw InputError("malformed PGM: bad sample '" + tok + "'");
      }
      mask.bits[i] = v != 0 ? 1 : 0;
    }
  }
  return mask;
}

RasterMask read_pgm(const std::filesystem::path& path) {
  try {
    return parse_pgm(read_file(path));
  } catch (const InputError& e) {
    const std::string what = e.what();
    if (what.rfind("cannot open", 0) == 0) throw;
    throw InputError(path.string() + ": " + what);
  }
}

std::string discs_csv(const DiscUnion& u) {
  std::string out = "cx,cy,r\n";
  for (const Disc& d : u.discs) {
    out += format_real(d.center.x) + ',' + format_real(d.center.y) + ',' + format_real(d.radius) +
           '\n';
  }
  return out;
}

std::vector<Disc> parse_discs_csv(std::string_view text) {
  std::vector<Disc> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (is_header(fields)) continue;
    if (fields.size() != 3) throw InputError("line " + std::to_string(line_no) + ": expected 'cx,cy,r'");
    out.push_back({{parse_real(fields[0], line_no), parse_real(fields[1], line_no)},
                   parse_real(fields[2], line_no)});
  }
  return out;
}

nlohmann::json tessellation_to_json(const Tessellation& t) {
  nlohmann::json j;
  j["width"] = t.width;
  j["height"] = t.height;
  nlohmann::json centers = nlohmann::json::array();
  for (const Point& p : t.centers) centers.push_back({p.x, p.y});
  nlohmann::json cells = nlohmann::json::array();
  for (const ConvexBody& c : t.cells) {
    nlohmann::json cell = nlohmann::json::array();
    for (const Point& p : c.vertices()) cell.push_back({p.x, p.y});
    cells.push_back(std::move(cell));
  }
  j["centers"] = std::move(centers);
  j["cells"] = std::move(cells);
  j["adjacency"] = t.adjacency;
  return j;
}

void write_kernel_matrix_csv(std::ostream& out, const KernelMatrix& matrix) {
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    for (std::size_t k = 0; k < matrix.size(); ++k) {
      if (k > 0) out << ',';
      out << format_real(matrix(i, k));
    }
    out << '\n';
  }
}

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return std::to_string(v);
  return std::string(buf, ptr);
}

}  // namespace setdist::io
