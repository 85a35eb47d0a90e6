#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

namespace pinning {

inline constexpr const char* kVersion = "1.0.0";

// One named output: a point value with a bracket and/or a standard error.
struct ResultValue {
    double value = 0.0;
    std::optional<double> lower;
    std::optional<double> upper;
    std::optional<double> se;

    static ResultValue exact(double v) { return {v, std::nullopt, std::nullopt, std::nullopt}; }
    static ResultValue bracketed(double v, double lo, double hi) { return {v, lo, hi, std::nullopt}; }
    static ResultValue estimate(double v, double se) { return {v, std::nullopt, std::nullopt, se}; }

    bool operator==(const ResultValue&) const = default;
};

struct RunRecord {
    std::string command;
    nlohmann::json params = nlohmann::json::object();
    std::uint64_t seed = 0;
    std::string version = kVersion;
    std::map<std::string, ResultValue> results;
    nlohmann::json details = nlohmann::json::object();
    double wall_ms = 0.0;

    nlohmann::json to_json() const;
    static RunRecord from_json(const nlohmann::json& j);
    // name,value,lower,upper,se
    std::string to_csv() const;

    bool operator==(const RunRecord& o) const;
};

// Doubles that JSON cannot hold (inf, nan) travel as strings.
nlohmann::json number_to_json(double x);
double number_from_json(const nlohmann::json& j);

// %.17g, with inf/-inf/nan spelled out
std::string format_number(double x);

} // namespace pinning
