#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "loopforge/descriptor_db.hpp"
#include "loopforge/harness.hpp"
#include "loopforge/pipeline.hpp"
#include "loopforge/pose_graph.hpp"

namespace loopforge::io {

// ---- LCDB binary descriptors ----

inline constexpr std::uint32_t kLcdbVersion = 1;

enum class DescriptorKind : std::uint32_t { Local = 0, Global = 1 };

using FloatMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct LcdbFrame {
    FrameId frame_id = 0;
    double timestamp = 0.0;
    FloatMatrix values;  // n x d
};

struct LcdbFile {
    DescriptorKind kind = DescriptorKind::Local;
    std::uint32_t n = 0;
    std::uint32_t d = 0;
    std::vector<LcdbFrame> frames;
};

/// Throws DimMismatch when a frame's matrix is not n x d.
std::string encode_lcdb(const LcdbFile& file);
/// Throws BadMagic, UnsupportedVersion, TruncatedPayload or TrailingData.
LcdbFile decode_lcdb(const std::string& bytes);

void write_lcdb(const std::filesystem::path& path, const LcdbFile& file);
LcdbFile read_lcdb(const std::filesystem::path& path);

LcdbFile to_lcdb(std::span<const LocalDescriptorSet> locals, std::span<const double> timestamps);
LocalDescriptorSet to_local_set(const LcdbFrame& frame);

// ---- TUM trajectories ----

/// "timestamp tx ty tz qx qy qz qw" with 9 significant digits. The scale of
/// a Sim(3) pose is not representable and is dropped.
void write_tum(std::ostream& out, const Trajectory& trajectory);
/// Frame ids are line indices (comments and blank lines excluded), each entry
/// references its predecessor. Throws ParseError with a line number.
Trajectory read_tum(std::istream& in);

void write_tum(const std::filesystem::path& path, const Trajectory& trajectory);
Trajectory read_tum(const std::filesystem::path& path);

// ---- correspondences ----

using CorrespondenceTable = std::map<std::pair<FrameId, FrameId>, std::vector<Correspondence>>;

/// One "frame_a frame_b px py pz qx qy qz" line per pair, 17 significant digits.
void write_correspondences(std::ostream& out, const CorrespondenceTable& table);
CorrespondenceTable read_correspondences(std::istream& in);

void write_correspondences(const std::filesystem::path& path, const CorrespondenceTable& table);
CorrespondenceTable read_correspondences(const std::filesystem::path& path);

// ---- pose graphs ----

/// NODE id s qw qx qy qz tx ty tz
/// EDGE from to s qw qx qy qz tx ty tz weight kind
/// The first NODE line is the gauge.
void write_graph(std::ostream& out, const PoseGraph& graph);
PoseGraph read_graph(std::istream& in);

void write_graph(const std::filesystem::path& path, const PoseGraph& graph);
PoseGraph read_graph(const std::filesystem::path& path);

// ---- configuration ----

struct RunConfig {
    std::uint64_t seed = 0;
    PipelineConfig pipeline;
    harness::WorldConfig world;
};

/// Throws ConfigSchemaError for unknown keys, wrong types or malformed JSON;
/// missing keys take their defaults. The top-level seed is copied into the
/// pipeline and world sections.
RunConfig parse_run_config(const std::string& json_text);
RunConfig read_run_config(const std::filesystem::path& path);

/// Canonical JSON with every default filled in and keys sorted.
std::string canonical_json(const RunConfig& cfg);
std::string canonical_json(const PipelineConfig& cfg);

std::string run_config_hash(const RunConfig& cfg);

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

// ---- JSON documents ----

std::string event_log_json(const EventLog& log);
EventLog parse_event_log(const std::string& json_text);

std::string report_json(const OptimizationReport& report);

std::string candidates_json(const std::string& config_hash, std::span<const event::CandidateScored> candidates);

std::string vocabulary_json(const Vocabulary& vocab);
Vocabulary parse_vocabulary(const std::string& json_text);

/// Global descriptors go to an LCDB file (kind global, n = 1); ids,
/// timestamps, poses and degenerate flags go to a JSON index next to it.
void write_database(const std::filesystem::path& lcdb_path, const std::filesystem::path& index_path,
                    const DescriptorDatabase& db);
std::vector<KeyframeRecord> read_database(const std::filesystem::path& lcdb_path,
                                          const std::filesystem::path& index_path);

std::string read_text(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void write_text(const std::filesystem::path& path, const std::string& contents);

}  // namespace loopforge::io
