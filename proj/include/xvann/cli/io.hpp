#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "xvann/bsde/state.hpp"
#include "xvann/market/path_cube.hpp"

namespace xvann::cli {

// Binary arrays: magic (8 bytes), version u32, dims (u64 each) little-endian,
// row-major doubles, then a trailer "XVAHASH:" + 16 hex digits of the config
// hash. Cubes use magic "XVAPATHS" with dims (i, p, n).
inline constexpr std::uint32_t kFormatVersion = 1;

struct Array {
    std::vector<std::uint64_t> dims;
    std::vector<double> data;
    std::string hash;
};

void write_array(const std::filesystem::path& file, const char (&magic)[9], const std::vector<std::uint64_t>& dims,
                 const std::vector<double>& data, const std::string& hash);
Array read_array(const std::filesystem::path& file, const char (&magic)[9], std::size_t rank);

// Cube components: x (factors, paths, dates), dw and hedge (factors, paths,
// steps) and numeraire (1, paths, dates), one file each with the given stem.
void write_cube(const std::filesystem::path& dir, const std::string& stem, const market::PathCube& cube,
                const std::string& hash);
market::PathCube read_cube(const std::filesystem::path& dir, const std::string& stem, const std::string& hash);

// Checkpoint of a trainable state: head.bin with [V0, Z0], one net_NNN.bin per
// network (magic "XVANNPRM", flat parameters in the layout of neural::Mlp), input standardization in
// inputs.bin, and a manifest listing them with the layer widths.
void write_checkpoint(const std::filesystem::path& dir, const bsde::TrainableState& st, const std::string& hash);
bsde::TrainableState read_checkpoint(const std::filesystem::path& dir, const std::string& hash);

// Text files start with "# config_hash=<hash>".
void write_text(const std::filesystem::path& file, const std::string& body, const std::string& hash);
std::string read_text(const std::filesystem::path& file, const std::string& hash);

// Config hash embedded in an artifact, or empty when the file carries none.
std::string artifact_hash(const std::filesystem::path& file);

// Refuses a directory holding artifacts of another configuration.
void check_directory(const std::filesystem::path& dir, const std::string& hash);

// %.17g
std::string fmt(double v);

}  // namespace xvann::cli
