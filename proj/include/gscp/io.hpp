#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "gscp/solver.hpp"
#include "gscp/tensor.hpp"

namespace gscp {

// File cannot be opened, is truncated, or is not in a recognized format.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Files parse but their contents are inconsistent with the request.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor container, magic "gscpt", version 1. Header lines: magic, version and
// payload encoding; order; shape. Binary payload is raw little-endian doubles
// in storage order, text payload is one decimal per line.
void write_tensor(const std::string& path, const DenseTensor& t, bool binary = true);
DenseTensor read_tensor(const std::string& path);

// Matrix container, magic "gscpm", same layout with a rows/cols line and
// column-major payload.
void write_matrix(const std::string& path, const Eigen::MatrixXd& m, bool binary = true);
Eigen::MatrixXd read_matrix(const std::string& path);

// Tab-separated iteration trace with a fixed header row.
void write_trace(const std::string& path, const SolveTrace& trace);

// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::string& path);

struct RunManifest {
  std::string variant;
  SolverConfig config;
  int stability_window = 20; // only meaningful for the rank-reducing variant
  std::string input_path;
  std::string input_digest;
  SolveStatus status = SolveStatus::MaxIters;
  double final_rel_err = 0.0;
  int final_support_size = 0;
  int outer_iterations = 0;
  double wall_seconds = 0.0;
  std::string trace_path;
  std::vector<std::string> factor_paths;
};

// JSON manifest describing one decompose run. Throws IoError unless the
// referenced trace and factor files already exist.
void write_manifest(const std::string& path, const RunManifest& m);
RunManifest read_manifest(const std::string& path);

}  // namespace gscp
