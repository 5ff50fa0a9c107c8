#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "setdist/approx.hpp"
#include "setdist/geometry.hpp"
#include "setdist/hyptest.hpp"
#include "setdist/kernels.hpp"
#include "setdist/nstat.hpp"
#include "setdist/pointproc.hpp"

namespace setdist::io {

/// Whole-file helpers; failures throw InputError naming the path.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// 64-bit FNV-1a, used for manifest file hashes.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

/// Bodies as "x,y" rows, one block per body, blocks separated by blank lines.
/// An optional "x,y" header line is skipped.
std::vector<ConvexBody> read_bodies_csv(std::istream& in);
void write_bodies_csv(std::ostream& out, const std::vector<ConvexBody>& bodies);

/// {"bodies": [[[x, y], ...], ...]} or a bare array of vertex lists.
std::vector<ConvexBody> bodies_from_json(const nlohmann::json& j);

/// One support vector per row, n comma-separated values.
std::vector<SupportVector> read_support_csv(std::istream& in);
void write_support_csv(std::ostream& out, const std::vector<SupportVector>& rows);

/// {"kind", "r", "v_scale", "V", "w" (number or array), "D"}; missing
/// parameters take the defaults of the kernel type.
KernelSpec kernel_from_json(const nlohmann::json& j);
nlohmann::json kernel_to_json(const KernelSpec& spec);

/// {method, statistic, p_value, replicates, seed, kernel, metadata, warnings}
nlohmann::json result_to_json(const TestResult& r);

/// Binary PGM (P5, maxval 255): 255 = foreground.
std::string pgm_bytes(const RasterMask& mask);
/// Reads P5 or P2; any nonzero sample is foreground.
RasterMask parse_pgm(std::string_view bytes);
RasterMask read_pgm(const std::filesystem::path& path);

/// "cx,cy,r" with a header line.
std::string discs_csv(const DiscUnion& u);
std::vector<Disc> parse_discs_csv(std::string_view text);

/// {centers, cells (vertex lists), adjacency}
nlohmann::json tessellation_to_json(const Tessellation& t);

/// Full matrix, one row per line.
void write_kernel_matrix_csv(std::ostream& out, const KernelMatrix& matrix);

/// Shortest round-trip decimal form.
std::string format_real(double v);

}  // namespace setdist::io
