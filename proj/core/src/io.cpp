#include "mmdalign/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

namespace mmdalign {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_rows(std::ostream& out, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << format_double(m(i, j));
    out << '\n';
  }
}

double parse_value(const std::string& token, const std::string& where) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) throw Error(where + ": bad number '" + token + "'");
  return v;
}

Matrix read_rows(std::istream& in, Index rows, Index cols, const std::string& where) {
  if (rows < 0 || cols < 0) throw Error(where + ": negative matrix shape");
  Matrix m(rows, cols);
  std::string token;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (!(in >> token)) throw Error(where + ": truncated matrix");
      m(i, j) = parse_value(token, where);
    }
  }
  return m;
}

void expect_keyword(std::istream& in, const std::string& keyword, const std::string& where) {
  std::string got;
  if (!(in >> got) || got != keyword) throw Error(where + ": expected '" + keyword + "', got '" + got + "'");
}

}  // namespace

void save_matrix(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << m.rows() << ' ' << m.cols() << '\n';
  write_rows(out, m);
  if (!out) throw Error("write failed: " + path.string());
}

Matrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open matrix file " + path.string());
  Index rows = 0, cols = 0;
  if (!(in >> rows >> cols)) throw Error(path.string() + ": missing \"rows cols\" header");
  return read_rows(in, rows, cols, path.string());
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "mmdalign-checkpoint 1\n";
  out << "epoch " << ckpt.epoch << '\n';
  out << "criterion " << format_double(ckpt.criterion) << '\n';
  out << "lr " << format_double(ckpt.lr) << '\n';
  for (const auto& [k, v] : ckpt.config) {
    if (k.find_first_of(" \t\n") != std::string::npos || v.find_first_of(" \t\n") != std::string::npos ||
        v.empty()) {
      throw Error("checkpoint config entries must be single nonempty tokens: " + k);
    }
    out << "config " << k << ' ' << v << '\n';
  }
  out << "mapping " << ckpt.mapping.w.rows() << ' ' << ckpt.mapping.w.cols() << '\n';
  write_rows(out, ckpt.mapping.w);
  out << "projector " << ckpt.projector.basis.rows() << ' ' << ckpt.projector.basis.cols() << '\n';
  write_rows(out, ckpt.projector.basis);
  out << "offset " << ckpt.projector.offset.size() << '\n';
  write_rows(out, ckpt.projector.offset.transpose());
  if (!out) throw Error("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  const std::string where = path.string();
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "mmdalign-checkpoint" || version != 1) {
    throw Error(where + ": not a version-1 checkpoint");
  }
  Checkpoint c;
  std::string token;
  expect_keyword(in, "epoch", where);
  in >> c.epoch;
  expect_keyword(in, "criterion", where);
  in >> token;
  c.criterion = parse_value(token, where);
  expect_keyword(in, "lr", where);
  in >> token;
  c.lr = parse_value(token, where);
  while (in >> token && token == "config") {
    std::string k, v;
    in >> k >> v;
    c.config.emplace_back(k, v);
  }
  if (token != "mapping") throw Error(where + ": expected 'mapping'");
  Index r = 0, cols = 0;
  in >> r >> cols;
  c.mapping.w = read_rows(in, r, cols, where);
  expect_keyword(in, "projector", where);
  in >> r >> cols;
  c.projector.basis = read_rows(in, r, cols, where);
  expect_keyword(in, "offset", where);
  in >> r;
  c.projector.offset = read_rows(in, 1, r, where).transpose();
  return c;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

}  // namespace mmdalign
