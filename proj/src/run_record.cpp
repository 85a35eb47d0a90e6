#include "pinning/run_record.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "pinning/errors.hpp"

namespace pinning {

using nlohmann::json;

json number_to_json(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    return x;
}

double number_from_json(const json& j)
{
    if (j.is_number())
        return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf")
            return std::numeric_limits<double>::infinity();
        if (s == "-inf")
            return -std::numeric_limits<double>::infinity();
        if (s == "nan")
            return std::numeric_limits<double>::quiet_NaN();
    }
    throw UsageError("not a number in record");
}

std::string format_number(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json RunRecord::to_json() const
{
    json r = json::object();
    for (const auto& [name, v] : results) {
        json e = json::object();
        e["value"] = number_to_json(v.value);
        if (v.lower)
            e["lower"] = number_to_json(*v.lower);
        if (v.upper)
            e["upper"] = number_to_json(*v.upper);
        if (v.se)
            e["se"] = number_to_json(*v.se);
        r[name] = e;
    }
    json j;
    j["command"] = command;
    j["params"] = params;
    j["seed"] = seed;
    j["version"] = version;
    j["results"] = r;
    if (!details.empty())
        j["details"] = details;
    j["wall_ms"] = wall_ms;
    return j;
}

RunRecord RunRecord::from_json(const json& j)
{
    RunRecord rec;
    rec.command = j.at("command").get<std::string>();
    rec.params = j.at("params");
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.version = j.at("version").get<std::string>();
    for (const auto& [name, e] : j.at("results").items()) {
        ResultValue v;
        v.value = number_from_json(e.at("value"));
        if (e.contains("lower"))
            v.lower = number_from_json(e.at("lower"));
        if (e.contains("upper"))
            v.upper = number_from_json(e.at("upper"));
        if (e.contains("se"))
            v.se = number_from_json(e.at("se"));
        rec.results[name] = v;
    }
    if (j.contains("details"))
        rec.details = j.at("details");
    rec.wall_ms = j.at("wall_ms").get<double>();
    return rec;
}

std::string RunRecord::to_csv() const
{
    std::ostringstream os;
    os << "name,value,lower,upper,se\n";
    auto opt = [](const std::optional<double>& x) { return x ? format_number(*x) : std::string(); };
    for (const auto& [name, v] : results)
        os << name << ',' << format_number(v.value) << ',' << opt(v.lower) << ',' << opt(v.upper) << ',' << opt(v.se)
           << '\n';
    return os.str();
}

namespace {

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }
bool same(const std::optional<double>& a, const std::optional<double>& b)
{
    return a.has_value() == b.has_value() && (!a || same(*a, *b));
}

} // namespace

bool RunRecord::operator==(const RunRecord& o) const
{
    if (command != o.command || params != o.params || seed != o.seed || version != o.version || details != o.details
        || wall_ms != o.wall_ms || results.size() != o.results.size())
        return false;
    for (const auto& [name, v] : results) {
        const auto it = o.results.find(name);
        if (it == o.results.end())
            return false;
        const auto& w = it->second;
        if (!same(v.value, w.value) || !same(v.lower, w.lower) || !same(v.upper, w.upper) || !same(v.se, w.se))
            return false;
    }
    return true;
}

} // namespace pinning
