#pragma once

#include "oseen/decay_lab.hpp"
#include "oseen/fields.hpp"
#include "oseen/geometry.hpp"

#include "json.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace oseen {

inline constexpr int kSchemaVersion = 1;

struct ConfigIssue {
    enum class Kind { Schema, Domain, Path };
    Kind kind = Kind::Schema;
    std::string path;  ///< JSON pointer of the offending field
    std::string message;

    std::string str() const;
};

struct ConfigError : std::runtime_error {
    std::vector<ConfigIssue> issues;
    explicit ConfigError(std::vector<ConfigIssue> v);
};

/// Prescribed boundary velocity family.
struct BoundarySpec {
    enum class Kind { Zero, Rotation, Tail };
    Kind kind = Kind::Zero;
    double amplitude = 1.0;
    double zeta = 0.9;  ///< Tail: declared H-tail rate
    double delta = 1.0;

    /// Time profile: t^2 exp(-2t) for Rotation, a C1 ramp times (1+t)^-(zeta+1/2) for Tail.
    double profile(double t) const;
    double dprofile(double t) const;
    /// Tangential zero-flux spatial pattern and its ambient gradient.
    static Vec3 pattern(const Vec3& x, const Vec3& n);
    static Mat3 pattern_gradient(const Vec3& n);
    Vec3 eval(const Vec3& x, const Vec3& n, double t) const { return profile(t) * pattern(x, n); }
};

struct ProblemConfig {
    double tau = 1.0;
    Shape shape;
    int mesh_level = 1;
    double dt = 0.25;
    int slabs = 25;
    SourceField source;
    InitialField initial;
    BoundarySpec boundary;
    int threads = 1;
};

struct Tolerances {
    double spatial = 0.15;
    double temporal = 0.1;
    double tail = 0.2;
    double quadrature = 0.01;
    double residual = 1e-3;
};

struct ExperimentConfig {
    std::string kind;
    nlohmann::json params;  ///< the experiment object as written
};

struct RunConfig {
    int schema_version = kSchemaVersion;
    std::filesystem::path output_dir;
    std::uint64_t seed = 1;
    int workers = 1;
    ProblemConfig problem;
    RateInputs rates;
    Tolerances tol;
    std::vector<ExperimentConfig> experiments;
    nlohmann::json raw;
};

const std::vector<std::string>& experiment_kinds();

/// Every problem in the document: schema (types, ranges, unknown keys), domain
/// constraints of the rate parameters when a rates experiment is listed, and the
/// output path. Nothing is executed or created.
std::vector<ConfigIssue> validate_config(const nlohmann::json& doc);

/// Parse a validated document; throws ConfigError listing all issues otherwise.
RunConfig parse_config(const nlohmann::json& doc);
/// Read, validate and parse a file. Unreadable files and JSON syntax errors are path
/// and schema issues respectively.
RunConfig load_config(const std::filesystem::path& file);
nlohmann::json read_config_json(const std::filesystem::path& file);

/// output_dir resolved against OSEEN_OUTPUT_ROOT when that is set and the path is relative.
std::filesystem::path resolve_output_dir(const std::string& configured);

/// A default document with every experiment kind listed.
nlohmann::json default_config();

}  // namespace oseen
