#include "lrmr/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace lrmr {

std::string format_real(double v) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

namespace {

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_real(std::string_view s, std::size_t line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ParseError(line, "invalid real '" + std::string(s) + "'");
  }
  return v;
}

Index parse_count(std::string_view s, std::size_t line, bool allow_zero) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < (allow_zero ? 0 : 1)) {
    throw ParseError(line, "invalid dimension '" + std::string(s) + "'");
  }
  return static_cast<Index>(v);
}

struct Header {
  Index m = 0;
  Index q = 0;
  Index p = 0;
  std::string tag;
};

Header read_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  const auto f = fields(line);
  if (f.size() != 4) throw ParseError(1, "header must be 'm q p kind'");
  return {parse_count(f[0], 1, false), parse_count(f[1], 1, false), parse_count(f[2], 1, true), std::string(f[3])};
}

void write_row_major(std::ostream& out, const Matrix& c) {
  for (Index i = 0; i < c.rows(); ++i) {
    for (Index j = 0; j < c.cols(); ++j) out << ' ' << format_real(c(i, j));
  }
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& data) {
  out << data.m() << ' ' << data.q() << ' ' << data.p() << ' ' << to_string(data.model().kind) << '\n';
  for (Index i = 0; i < data.n(); ++i) {
    out << format_real(data.y()(i));
    for (Index k = 0; k < data.p(); ++k) out << ' ' << format_real(data.z()(i, k));
    write_row_major(out, data.x(i));
    out << '\n';
  }
  if (!out) throw IoError("failed writing dataset");
}

Dataset read_dataset(std::istream& in) {
  const Header h = read_header(in);
  LossModel model;
  try {
    model.kind = parse_loss_kind(h.tag);
  } catch (const ArgumentError& e) {
    throw ParseError(1, e.what());
  }
  const Index mq = h.m * h.q;
  const std::size_t width = static_cast<std::size_t>(1 + h.p + mq);

  std::vector<double> ys;
  std::vector<double> zs;
  std::vector<double> xs;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = fields(line);
    if (f.empty()) continue;
    if (f.size() != width) {
      throw ParseError(lineno, "expected " + std::to_string(width) + " fields, found " + std::to_string(f.size()));
    }
    const double y = parse_real(f[0], lineno);
    if (model.kind == LossKind::Logistic && y != 0.0 && y != 1.0) {
      throw ParseError(lineno, "logistic response must be 0 or 1");
    }
    ys.push_back(y);
    for (Index k = 0; k < h.p; ++k) zs.push_back(parse_real(f[static_cast<std::size_t>(1 + k)], lineno));
    for (Index k = 0; k < mq; ++k) xs.push_back(parse_real(f[static_cast<std::size_t>(1 + h.p + k)], lineno));
  }
  if (in.bad()) throw IoError("failed reading dataset");
  if (ys.empty()) throw ParseError(lineno, "dataset has no samples");

  const Index n = static_cast<Index>(ys.size());
  Matrix design(n, mq);
  Matrix z(n, h.p);
  Vector y = Eigen::Map<const Vector>(ys.data(), n);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < h.p; ++k) z(i, k) = zs[static_cast<std::size_t>(i * h.p + k)];
    // File order is row-major, the design row is column-major vec(X_i).
    const double* row = xs.data() + i * mq;
    for (Index a = 0; a < h.m; ++a) {
      for (Index b = 0; b < h.q; ++b) design(i, b * h.m + a) = row[a * h.q + b];
    }
  }
  return Dataset(h.m, h.q, std::move(design), std::move(z), std::move(y), model);
}

void write_coefficients(std::ostream& out, const Coefficients& coeff) {
  out << coeff.rows() << ' ' << coeff.cols() << ' ' << coeff.dim() << " coefficients\n";
  bool first = true;
  for (Index k = 0; k < coeff.dim(); ++k) {
    if (!first) out << ' ';
    out << format_real(coeff.gamma(k));
    first = false;
  }
  std::ostringstream rest;
  write_row_major(rest, coeff.C);
  out << (first ? rest.str().substr(1) : rest.str()) << '\n';
  if (!out) throw IoError("failed writing coefficients");
}

Coefficients read_coefficients(std::istream& in) {
  const Header h = read_header(in);
  if (h.tag != "coefficients") throw ParseError(1, "expected a coefficients header, found '" + h.tag + "'");
  std::string line;
  std::size_t lineno = 1;
  std::vector<std::string_view> f;
  while (std::getline(in, line)) {
    ++lineno;
    f = fields(line);
    if (!f.empty()) break;
  }
  const std::size_t width = static_cast<std::size_t>(h.p + h.m * h.q);
  if (f.size() != width) {
    throw ParseError(lineno, "expected " + std::to_string(width) + " fields, found " + std::to_string(f.size()));
  }
  Coefficients c = Coefficients::Zero(h.m, h.q, h.p);
  for (Index k = 0; k < h.p; ++k) c.gamma(k) = parse_real(f[static_cast<std::size_t>(k)], lineno);
  for (Index a = 0; a < h.m; ++a) {
    for (Index b = 0; b < h.q; ++b) c.C(a, b) = parse_real(f[static_cast<std::size_t>(h.p + a * h.q + b)], lineno);
  }
  return c;
}

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("failed writing '" + path + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path + "'");
  }
}

void save_dataset(const std::string& path, const Dataset& data) {
  std::ostringstream os;
  write_dataset(os, data);
  write_file_atomic(path, os.str());
}

Dataset load_dataset(const std::string& path) {
  auto in = open_input(path);
  return read_dataset(in);
}

void save_coefficients(const std::string& path, const Coefficients& coeff) {
  std::ostringstream os;
  write_coefficients(os, coeff);
  write_file_atomic(path, os.str());
}

Coefficients load_coefficients(const std::string& path) {
  auto in = open_input(path);
  return read_coefficients(in);
}

}  // namespace lrmr
