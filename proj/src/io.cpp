#include "rdpg/io.hpp"

#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "rdpg/errors.hpp"

namespace rdpg {
namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string() + ": " + std::strerror(errno));
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string() + ": " + std::strerror(errno));
  return out;
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r") == std::string::npos;
}

bool parse_index(const std::string& token, std::size_t& out) {
  const char* first = token.data();
  const char* last = first + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

Graph read_edge_list(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  Graph g;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    std::istringstream fields(line);
    if (line.find('#') != std::string::npos) {
      std::string hash, key;
      std::size_t n = 0;
      std::string count;
      fields >> hash >> key >> count;
      if (hash == "#" && key == "vertices:") {
        if (have_header) throw ParseError("duplicate vertex header", lineno);
        if (!parse_index(count, n)) throw ParseError("bad vertex count", lineno);
        g = Graph(n);
        have_header = true;
        continue;
      }
      throw ParseError("unexpected comment line", lineno);
    }
    if (!have_header) throw ParseError("missing '# vertices: n' header", lineno);
    std::string a, b, extra;
    fields >> a >> b;
    std::size_t u = 0, v = 0;
    if (!parse_index(a, u) || !parse_index(b, v) || (fields >> extra)) {
      throw ParseError("expected 'u v'", lineno);
    }
    if (u == v) throw ParseError("self-loop", lineno);
    if (u >= g.size() || v >= g.size()) throw ParseError("vertex out of range", lineno);
    g.add_edge(u, v);
  }
  if (!have_header) throw ParseError("missing '# vertices: n' header", 0);
  return g;
}

Graph read_edge_list(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_edge_list(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << "# vertices: " << g.size() << '\n';
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

void write_edge_list(const std::filesystem::path& path, const Graph& g) {
  auto out = open_out(path);
  write_edge_list(out, g);
}

std::string format_double(double x) {
  std::ostringstream s;
  s << std::setprecision(std::numeric_limits<double>::max_digits10) << x;
  return s.str();
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  auto out = open_out(path);
  write_matrix_csv(out, m);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream s(line);
  while (std::getline(s, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Eigen::MatrixXd read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    std::vector<double> row;
    for (const auto& cell : split_csv_line(line)) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (!blank(cell.substr(used))) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError("not a number: '" + cell + "'", lineno);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("ragged row", lineno);
    }
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_matrix_csv(in);
}

}  // namespace rdpg
