#include <json.hpp>

#include "loopforge/error.hpp"
#include "loopforge/io.hpp"

namespace loopforge::io {

using nlohmann::json;

namespace {

[[noreturn]] void schema_fail(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::ConfigSchemaError, (where.empty() ? std::string("<root>") : where) + ": " + what);
}

json to_json(const ThresholdConfig& c) {
    return {{"warmup_target", c.warmup_target},
            {"window", c.window},
            {"fixed_threshold", c.fixed_threshold ? json(*c.fixed_threshold) : json(nullptr)}};
}

json to_json(const RansacConfig& c) {
    return {{"max_iters", c.max_iters},
            {"inlier_dist", c.inlier_dist},
            {"min_inliers", c.min_inliers},
            {"adaptive_stop", c.adaptive_stop},
            {"confidence", c.confidence}};
}

json to_json(const OptimizerConfig& c) {
    return {{"max_iterations", c.max_iterations},
            {"initial_damping", c.initial_damping},
            {"cost_tolerance", c.cost_tolerance},
            {"huber_loop_edges", c.huber_loop_edges},
            {"huber_delta", c.huber_delta},
            {"jacobians", c.jacobians == JacobianMode::Analytic ? "analytic" : "numeric"}};
}

json to_json(const PipelineConfig& c) {
    return {{"exclusion_window", c.exclusion_window},
            {"threshold", to_json(c.threshold)},
            {"retrieval_k", c.retrieval_k},
            {"vocabulary_k", c.vocabulary_k},
            {"vocabulary_path", c.vocabulary_path},
            {"ransac", to_json(c.ransac)},
            {"pgo", to_json(c.pgo)},
            {"optimization_lag", c.optimization_lag},
            {"seed", c.seed}};
}

json to_json(const harness::WorldConfig& c) {
    return {{"shape", harness::to_string(c.shape)},
            {"keyframes", c.keyframes},
            {"revisit_period", c.revisit_period},
            {"extent", c.extent},
            {"frame_interval", c.frame_interval},
            {"drift",
             {{"rotation_sigma", c.drift.rotation_sigma},
              {"translation_sigma", c.drift.translation_sigma},
              {"scale_sigma", c.drift.scale_sigma}}},
            {"places",
             {{"descriptor_dim", c.places.descriptor_dim},
              {"signatures_per_place", c.places.signatures_per_place},
              {"locals_per_signature", c.places.locals_per_signature},
              {"noise_sigma", c.places.noise_sigma},
              {"separation", c.places.separation}}},
            {"correspondences",
             {{"count", c.correspondences.count},
              {"outlier_ratio", c.correspondences.outlier_ratio},
              {"noise_sigma", c.correspondences.noise_sigma}}}};
}

json to_json(const RunConfig& c) {
    json pipeline = to_json(c.pipeline);
    pipeline.erase("seed");
    return {{"seed", c.seed}, {"pipeline", pipeline}, {"world", to_json(c.world)}};
}

/// Overlay `input` onto `defaults`, rejecting keys and types the defaults do not have.
void merge_checked(json& defaults, const json& input, const std::string& where) {
    if (!input.is_object()) schema_fail(where, "expected an object");
    for (const auto& [key, value] : input.items()) {
        const std::string path = where.empty() ? key : where + "." + key;
        if (!defaults.contains(key)) schema_fail(path, "unknown key");
        json& slot = defaults[key];
        if (slot.is_object()) {
            merge_checked(slot, value, path);
        } else if (slot.is_null()) {
            if (!value.is_null() && !value.is_number()) schema_fail(path, "expected a number or null");
            slot = value;
        } else if (slot.is_number_integer()) {
            if (!value.is_number_integer()) schema_fail(path, "expected an integer");
            if (value.is_number_integer() && !value.is_number_unsigned() && value.get<std::int64_t>() < 0) {
                schema_fail(path, "expected a non-negative integer");
            }
            slot = value;
        } else if (slot.is_number()) {
            if (!value.is_number()) schema_fail(path, "expected a number");
            slot = value.get<double>();
        } else if (slot.type() != value.type()) {
            schema_fail(path, std::string("expected a ") + slot.type_name());
        } else {
            slot = value;
        }
    }
}

void from_json_checked(const json& j, PipelineConfig& c) {
    c.exclusion_window = j.at("exclusion_window").get<std::uint64_t>();
    const auto& t = j.at("threshold");
    c.threshold.warmup_target = t.at("warmup_target").get<std::size_t>();
    c.threshold.window = t.at("window").get<std::size_t>();
    c.threshold.fixed_threshold.reset();
    if (!t.at("fixed_threshold").is_null()) c.threshold.fixed_threshold = t.at("fixed_threshold").get<double>();
    c.retrieval_k = j.at("retrieval_k").get<std::size_t>();
    c.vocabulary_k = j.at("vocabulary_k").get<std::size_t>();
    c.vocabulary_path = j.at("vocabulary_path").get<std::string>();
    const auto& r = j.at("ransac");
    c.ransac.max_iters = r.at("max_iters").get<int>();
    c.ransac.inlier_dist = r.at("inlier_dist").get<double>();
    c.ransac.min_inliers = r.at("min_inliers").get<std::size_t>();
    c.ransac.adaptive_stop = r.at("adaptive_stop").get<bool>();
    c.ransac.confidence = r.at("confidence").get<double>();
    const auto& p = j.at("pgo");
    c.pgo.max_iterations = p.at("max_iterations").get<int>();
    c.pgo.initial_damping = p.at("initial_damping").get<double>();
    c.pgo.cost_tolerance = p.at("cost_tolerance").get<double>();
    c.pgo.huber_loop_edges = p.at("huber_loop_edges").get<bool>();
    c.pgo.huber_delta = p.at("huber_delta").get<double>();
    const auto mode = p.at("jacobians").get<std::string>();
    if (mode == "analytic") {
        c.pgo.jacobians = JacobianMode::Analytic;
    } else if (mode == "numeric") {
        c.pgo.jacobians = JacobianMode::Numeric;
    } else {
        schema_fail("pipeline.pgo.jacobians", "expected \"analytic\" or \"numeric\"");
    }
    c.optimization_lag = j.at("optimization_lag").get<std::size_t>();
}

void from_json_checked(const json& j, harness::WorldConfig& c) {
    try {
        c.shape = harness::parse_shape(j.at("shape").get<std::string>());
    } catch (const Error& e) {
        schema_fail("world.shape", e.what());
    }
    c.keyframes = j.at("keyframes").get<std::size_t>();
    c.revisit_period = j.at("revisit_period").get<std::size_t>();
    c.extent = j.at("extent").get<double>();
    c.frame_interval = j.at("frame_interval").get<double>();
    const auto& d = j.at("drift");
    c.drift.rotation_sigma = d.at("rotation_sigma").get<double>();
    c.drift.translation_sigma = d.at("translation_sigma").get<double>();
    c.drift.scale_sigma = d.at("scale_sigma").get<double>();
    const auto& p = j.at("places");
    c.places.descriptor_dim = p.at("descriptor_dim").get<std::size_t>();
    c.places.signatures_per_place = p.at("signatures_per_place").get<std::size_t>();
    c.places.locals_per_signature = p.at("locals_per_signature").get<std::size_t>();
    c.places.noise_sigma = p.at("noise_sigma").get<double>();
    c.places.separation = p.at("separation").get<double>();
    const auto& k = j.at("correspondences");
    c.correspondences.count = k.at("count").get<std::size_t>();
    c.correspondences.outlier_ratio = k.at("outlier_ratio").get<double>();
    c.correspondences.noise_sigma = k.at("noise_sigma").get<double>();
}

json sim3_json(const Sim3& t) {
    return json::array({t.s, t.r.w(), t.r.x(), t.r.y(), t.r.z(), t.t.x(), t.t.y(), t.t.z()});
}

Sim3 sim3_from(const json& j) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != 8) throw Error(ErrorCode::ParseError, "a Sim(3) needs 8 numbers");
    Sim3 t;
    t.s = v[0];
    t.r = Eigen::Quaterniond(v[1], v[2], v[3], v[4]);
    t.t = Vec3(v[5], v[6], v[7]);
    return t;
}

json report_to_json(const OptimizationReport& r) {
    return {{"initial_cost", r.initial_cost},
            {"final_cost", r.final_cost},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"accepted_costs", r.accepted_costs}};
}

OptimizationReport report_from(const json& j) {
    OptimizationReport r;
    r.initial_cost = j.at("initial_cost").get<double>();
    r.final_cost = j.at("final_cost").get<double>();
    r.iterations = j.at("iterations").get<int>();
    r.converged = j.at("converged").get<bool>();
    r.accepted_costs = j.at("accepted_costs").get<std::vector<double>>();
    return r;
}

std::string code_name(ErrorCode c) { return std::string(to_string(c)); }

ErrorCode code_from(const json& j) {
    const auto code = parse_error_code(j.get<std::string>());
    if (!code) throw Error(ErrorCode::ParseError, "unknown error code " + j.dump());
    return *code;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct EventToJson {
    json operator()(const event::KeyframeIngested& e) const {
        return {{"timestamp", e.timestamp}, {"degenerate", e.degenerate}};
    }
    json operator()(const event::CandidateScored& e) const {
        return {{"match_id", e.match_id},
                {"similarity", e.similarity},
                {"loop_thresh", optional_number(e.loop_thresh)},
                {"is_loop", e.is_loop}};
    }
    json operator()(const event::LoopAccepted& e) const {
        return {{"match_id", e.match_id}, {"similarity", e.similarity}, {"loop_thresh", e.loop_thresh},
                {"inliers", e.inliers},   {"weight", e.weight},         {"relative", sim3_json(e.relative)}};
    }
    json operator()(const event::LoopRejected& e) const {
        return {{"match_id", e.match_id}, {"reason", code_name(e.reason)}};
    }
    json operator()(const event::OptimizationStarted& e) const {
        return {{"run", e.run}, {"nodes", e.nodes}, {"edges", e.edges}, {"loop_edges", e.loop_edges}};
    }
    json operator()(const event::OptimizationFinished& e) const {
        return {{"run", e.run},
                {"report", report_to_json(e.report)},
                {"error", e.error ? json(code_name(*e.error)) : json(nullptr)}};
    }
};

PipelineEvent event_from(const json& j) {
    const auto type = j.at("type").get<std::string>();
    const FrameId frame = j.at("frame_id").get<FrameId>();
    if (type == "KeyframeIngested") {
        return event::KeyframeIngested{frame, j.at("timestamp").get<double>(), j.at("degenerate").get<bool>()};
    }
    if (type == "CandidateScored") {
        event::CandidateScored e{frame, j.at("match_id").get<FrameId>(), j.at("similarity").get<double>(),
                                 std::nullopt, j.at("is_loop").get<bool>()};
        if (!j.at("loop_thresh").is_null()) e.loop_thresh = j.at("loop_thresh").get<double>();
        return e;
    }
    if (type == "LoopAccepted") {
        return event::LoopAccepted{frame,
                                   j.at("match_id").get<FrameId>(),
                                   j.at("similarity").get<double>(),
                                   j.at("loop_thresh").get<double>(),
                                   j.at("inliers").get<std::size_t>(),
                                   j.at("weight").get<double>(),
                                   sim3_from(j.at("relative"))};
    }
    if (type == "LoopRejected") {
        return event::LoopRejected{frame, j.at("match_id").get<FrameId>(), code_from(j.at("reason"))};
    }
    if (type == "OptimizationStarted") {
        return event::OptimizationStarted{frame, j.at("run").get<std::size_t>(), j.at("nodes").get<std::size_t>(),
                                          j.at("edges").get<std::size_t>(), j.at("loop_edges").get<std::size_t>()};
    }
    if (type == "OptimizationFinished") {
        event::OptimizationFinished e{frame, j.at("run").get<std::size_t>(), report_from(j.at("report")),
                                      std::nullopt};
        if (!j.at("error").is_null()) e.error = code_from(j.at("error"));
        return e;
    }
    throw Error(ErrorCode::ParseError, "unknown event type '" + type + "'");
}

json parse_json(const std::string& text, ErrorCode code) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(code, e.what());
    }
}

/// Runs fn, turning nlohmann type and key errors into `code`.
template <typename Fn>
auto guarded(ErrorCode code, Fn fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw Error(code, e.what());
    }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    const json input = parse_json(json_text, ErrorCode::ConfigSchemaError);
    json merged = to_json(RunConfig{});
    merge_checked(merged, input, "");
    return guarded(ErrorCode::ConfigSchemaError, [&] {
        RunConfig cfg;
        cfg.seed = merged.at("seed").get<std::uint64_t>();
        from_json_checked(merged.at("pipeline"), cfg.pipeline);
        from_json_checked(merged.at("world"), cfg.world);
        cfg.pipeline.seed = cfg.seed;
        cfg.world.seed = cfg.seed;
        return cfg;
    });
}

RunConfig read_run_config(const std::filesystem::path& path) { return parse_run_config(read_text(path)); }

std::string canonical_json(const RunConfig& cfg) { return to_json(cfg).dump(); }

std::string canonical_json(const PipelineConfig& cfg) { return to_json(cfg).dump(); }

std::string run_config_hash(const RunConfig& cfg) { return fnv1a_hex(canonical_json(cfg)); }

std::string event_log_json(const EventLog& log) {
    json events = json::array();
    for (const auto& e : log.events) {
        json j = std::visit(EventToJson{}, e);
        j["type"] = event_name(e);
        j["frame_id"] = event_frame(e);
        events.push_back(std::move(j));
    }
    return json{{"config_hash", log.config_hash}, {"events", events}}.dump(1) + "\n";
}

EventLog parse_event_log(const std::string& json_text) {
    const json j = parse_json(json_text, ErrorCode::ParseError);
    return guarded(ErrorCode::ParseError, [&] {
        EventLog log;
        log.config_hash = j.at("config_hash").get<std::string>();
        for (const auto& e : j.at("events")) {
            log.events.push_back(event_from(e));
        }
        return log;
    });
}

std::string report_json(const OptimizationReport& report) { return report_to_json(report).dump(1) + "\n"; }

std::string candidates_json(const std::string& config_hash, std::span<const event::CandidateScored> candidates) {
    json list = json::array();
    for (const auto& c : candidates) {
        list.push_back({{"query_id", c.frame_id},
                        {"match_id", c.match_id},
                        {"similarity", c.similarity},
                        {"loop_thresh", optional_number(c.loop_thresh)}});
    }
    return json{{"config_hash", config_hash}, {"candidates", list}}.dump(1) + "\n";
}

std::string vocabulary_json(const Vocabulary& vocab) {
    json centers = json::array();
    for (Eigen::Index r = 0; r < vocab.centers().rows(); ++r) {
        std::vector<double> row(vocab.centers().row(r).begin(), vocab.centers().row(r).end());
        centers.push_back(row);
    }
    return json{{"k", vocab.k()},
                {"dim", vocab.dim()},
                {"seed", vocab.seed()},
                {"centers", centers},
                {"objective_history", vocab.objective_history()}}
               .dump() +
           "\n";
}

Vocabulary parse_vocabulary(const std::string& json_text) {
    const json j = parse_json(json_text, ErrorCode::ParseError);
    return guarded(ErrorCode::ParseError, [&] {
        const auto k = j.at("k").get<std::size_t>();
        const auto dim = j.at("dim").get<std::size_t>();
        const auto rows = j.at("centers").get<std::vector<std::vector<double>>>();
        if (rows.size() != k || k == 0) throw Error(ErrorCode::DimMismatch, "vocabulary needs k center rows");
        LocalDescriptorSet centers(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(dim));
        for (std::size_t r = 0; r < k; ++r) {
            if (rows[r].size() != dim) throw Error(ErrorCode::DimMismatch, "center row has the wrong dimension");
            for (std::size_t c = 0; c < dim; ++c) centers(r, c) = rows[r][c];
        }
        return Vocabulary(std::move(centers), j.at("seed").get<std::uint64_t>(),
                          j.value("objective_history", std::vector<double>{}));
    });
}

void write_database(const std::filesystem::path& lcdb_path, const std::filesystem::path& index_path,
                    const DescriptorDatabase& db) {
    const auto records = db.snapshot();
    LcdbFile file;
    file.kind = DescriptorKind::Global;
    file.n = 1;
    file.d = records.empty() ? 0 : static_cast<std::uint32_t>(records.front().descriptor.size());
    json index = json::array();
    for (const auto& r : records) {
        file.frames.push_back({r.frame_id, r.timestamp, r.descriptor.values.transpose().cast<float>()});
        index.push_back({{"frame_id", r.frame_id},
                         {"timestamp", r.timestamp},
                         {"degenerate", r.descriptor.degenerate},
                         {"pose", sim3_json(r.pose)}});
    }
    write_lcdb(lcdb_path, file);
    write_text(index_path, json{{"descriptors", lcdb_path.filename().string()}, {"records", index}}.dump(1) + "\n");
}

std::vector<KeyframeRecord> read_database(const std::filesystem::path& lcdb_path,
                                          const std::filesystem::path& index_path) {
    const LcdbFile file = read_lcdb(lcdb_path);
    if (file.kind != DescriptorKind::Global || (file.n != 1 && !file.frames.empty())) {
        throw Error(ErrorCode::DimMismatch, "database descriptors must be global (n = 1)");
    }
    const json index = parse_json(read_text(index_path), ErrorCode::ParseError);
    return guarded(ErrorCode::ParseError, [&] {
        const auto& rows = index.at("records");
        if (rows.size() != file.frames.size()) {
            throw Error(ErrorCode::DimMismatch, "index and descriptor file disagree on the record count");
        }
        std::vector<KeyframeRecord> out;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& row = rows[i];
            const auto& frame = file.frames[i];
            if (row.at("frame_id").get<FrameId>() != frame.frame_id) {
                throw Error(ErrorCode::DimMismatch, "index and descriptor file disagree on frame ids");
            }
            KeyframeRecord r;
            r.frame_id = frame.frame_id;
            r.timestamp = frame.timestamp;
            r.descriptor.values = frame.values.row(0).transpose().cast<double>();
            r.descriptor.degenerate = row.at("degenerate").get<bool>();
            r.pose = sim3_from(row.at("pose"));
            out.push_back(std::move(r));
        }
        return out;
    });
}

}  // namespace loopforge::io

namespace loopforge {

std::string config_hash(const PipelineConfig& cfg) { return io::fnv1a_hex(io::canonical_json(cfg)); }

}  // namespace loopforge
