#include "gscp/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace gscp {

namespace {

constexpr const char* kTensorMagic = "gscpt";
constexpr const char* kMatrixMagic = "gscpm";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Header {
  std::string magic;
  int version = 0;
  bool binary = false;
};

Header read_header(std::istream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  std::istringstream hs(line);
  Header h;
  std::string enc;
  if (!(hs >> h.magic >> h.version >> enc)) throw IoError(path + ": bad header");
  if (h.version != 1) throw IoError(path + ": unsupported version");
  if (enc == "binary")
    h.binary = true;
  else if (enc == "text")
    h.binary = false;
  else
    throw IoError(path + ": unknown payload encoding");
  return h;
}

void write_payload(std::ostream& out, const double* data, Eigen::Index count, bool binary) {
  if (binary) {
    out.write(reinterpret_cast<const char*>(data), count * static_cast<Eigen::Index>(sizeof(double)));
  } else {
    for (Eigen::Index i = 0; i < count; ++i) out << fmt17(data[i]) << '\n';
  }
}

void read_payload(std::istream& in, double* data, Eigen::Index count, bool binary,
                  const std::string& path) {
  if (binary) {
    in.read(reinterpret_cast<char*>(data), count * static_cast<Eigen::Index>(sizeof(double)));
    if (in.gcount() != count * static_cast<Eigen::Index>(sizeof(double)))
      throw IoError(path + ": truncated payload");
  } else {
    for (Eigen::Index i = 0; i < count; ++i)
      if (!(in >> data[i])) throw IoError(path + ": truncated payload");
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open");
  return in;
}

}  // namespace

void write_tensor(const std::string& path, const DenseTensor& t, bool binary) {
  auto out = open_out(path);
  out << kTensorMagic << " 1 " << (binary ? "binary" : "text") << '\n';
  out << t.order() << '\n';
  for (int i = 0; i < t.order(); ++i) out << t.dim(i) << (i + 1 < t.order() ? ' ' : '\n');
  write_payload(out, t.vec().data(), t.size(), binary);
  if (!out) throw IoError(path + ": write failed");
}

DenseTensor read_tensor(const std::string& path) {
  auto in = open_in(path);
  Header h = read_header(in, path);
  if (h.magic != kTensorMagic) throw IoError(path + ": not a tensor file");
  int order = 0;
  if (!(in >> order) || order < 1 || order > 64) throw IoError(path + ": bad order");
  std::vector<Eigen::Index> shape(order);
  for (int i = 0; i < order; ++i)
    if (!(in >> shape[i]) || shape[i] < 1) throw IoError(path + ": bad shape");
  in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
  DenseTensor t(shape);
  read_payload(in, t.vec().data(), t.size(), h.binary, path);
  return t;
}

void write_matrix(const std::string& path, const Eigen::MatrixXd& m, bool binary) {
  auto out = open_out(path);
  out << kMatrixMagic << " 1 " << (binary ? "binary" : "text") << '\n';
  out << m.rows() << ' ' << m.cols() << '\n';
  write_payload(out, m.data(), m.size(), binary);
  if (!out) throw IoError(path + ": write failed");
}

Eigen::MatrixXd read_matrix(const std::string& path) {
  auto in = open_in(path);
  Header h = read_header(in, path);
  if (h.magic != kMatrixMagic) throw IoError(path + ": not a matrix file");
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) throw IoError(path + ": bad dimensions");
  in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
  Eigen::MatrixXd m(rows, cols);
  read_payload(in, m.data(), m.size(), h.binary, path);
  return m;
}

void write_trace(const std::string& path, const SolveTrace& trace) {
  auto out = open_out(path);
  out << "k\tF\tRelErr\tlambda\tw_k\tsupport_size\tsafeguard_used\n";
  for (const TraceRow& r : trace.rows) {
    out << r.k << '\t' << fmt17(r.objective) << '\t' << fmt17(r.rel_err) << '\t'
        << fmt17(r.lambda) << '\t' << fmt17(r.w) << '\t' << r.support_size << '\t'
        << (r.safeguard_used ? 1 : 0) << '\n';
  }
  if (!out) throw IoError(path + ": write failed");
}

std::string file_digest(const std::string& path) {
  auto in = open_in(path);
  std::uint64_t h = 14695981039346656037ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016" PRIx64, h);
  return hex;
}

namespace {

nlohmann::json config_to_json(const SolverConfig& c) {
  return {{"rank_init", c.rank_init},   {"epsilon", c.epsilon},
          {"inner_iters", c.inner_iters}, {"gamma", c.gamma},
          {"lambda_max", c.lambda_max}, {"lambda_min", c.lambda_min},
          {"kappa", c.kappa},           {"stop_tol", c.stop_tol},
          {"max_outer", c.max_outer},   {"seed", c.seed}};
}

SolverConfig config_from_json(const nlohmann::json& j) {
  SolverConfig c;
  c.rank_init = j.at("rank_init").get<int>();
  c.epsilon = j.at("epsilon").get<double>();
  c.inner_iters = j.at("inner_iters").get<int>();
  c.gamma = j.at("gamma").get<double>();
  c.lambda_max = j.at("lambda_max").get<double>();
  c.lambda_min = j.at("lambda_min").get<double>();
  c.kappa = j.at("kappa").get<double>();
  c.stop_tol = j.at("stop_tol").get<double>();
  c.max_outer = j.at("max_outer").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void write_manifest(const std::string& path, const RunManifest& m) {
  for (const std::string& p : m.factor_paths)
    if (!std::filesystem::exists(p)) throw IoError("manifest references missing file: " + p);
  if (!std::filesystem::exists(m.trace_path))
    throw IoError("manifest references missing file: " + m.trace_path);

  nlohmann::json j{
      {"format", "gscp-manifest"},
      {"version", 1},
      {"variant", m.variant},
      {"seed", m.config.seed},
      {"config", config_to_json(m.config)},
      {"stability_window", m.stability_window},
      {"input", {{"path", m.input_path}, {"fnv1a64", m.input_digest}}},
      {"status", to_string(m.status)},
      {"final",
       {{"rel_err", m.final_rel_err},
        {"support_size", m.final_support_size},
        {"outer_iterations", m.outer_iterations},
        {"wall_seconds", m.wall_seconds}}},
      {"files", {{"trace", m.trace_path}, {"factors", m.factor_paths}}}};

  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError(path + ": write failed");
}

RunManifest read_manifest(const std::string& path) {
  auto in = open_in(path);
  nlohmann::json j;
  try {
    in >> j;
    RunManifest m;
    if (j.at("format").get<std::string>() != "gscp-manifest")
      throw DataError(path + ": not a run manifest");
    m.variant = j.at("variant").get<std::string>();
    m.config = config_from_json(j.at("config"));
    m.stability_window = j.value("stability_window", 20);
    m.input_path = j.at("input").at("path").get<std::string>();
    m.input_digest = j.at("input").at("fnv1a64").get<std::string>();
    m.status = j.at("status").get<std::string>() == "converged" ? SolveStatus::Converged
                                                                : SolveStatus::MaxIters;
    m.final_rel_err = j.at("final").at("rel_err").get<double>();
    m.final_support_size = j.at("final").at("support_size").get<int>();
    m.outer_iterations = j.at("final").at("outer_iterations").get<int>();
    m.wall_seconds = j.at("final").at("wall_seconds").get<double>();
    m.trace_path = j.at("files").at("trace").get<std::string>();
    m.factor_paths = j.at("files").at("factors").get<std::vector<std::string>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace gscp
