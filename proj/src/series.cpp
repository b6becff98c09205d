#include "aqua/series.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace aqua {

namespace {

// Howard Hinnant's days-from-civil algorithm.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    unsigned yoe = static_cast<unsigned>(y - era * 400);
    unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
    unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    unsigned doe = static_cast<unsigned>(z - era * 146097);
    unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    int yy = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = yy + (m <= 2);
}

} // namespace

Timestamp parse_iso8601(const std::string& s) {
    int y, mo, d, h, mi, se;
    char tz;
    if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d%c", &y, &mo, &d, &h, &mi, &se, &tz) != 7 ||
        tz != 'Z' || mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 ||
        mi < 0 || mi > 59 || se < 0 || se > 60) {
        throw std::invalid_argument("malformed timestamp: " + s);
    }
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se;
}

std::string format_iso8601(Timestamp t) {
    std::int64_t days = t / 86400;
    std::int64_t sod = t % 86400;
    if (sod < 0) {
        sod += 86400;
        --days;
    }
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                  static_cast<int>(sod / 3600), static_cast<int>((sod / 60) % 60),
                  static_cast<int>(sod % 60));
    return buf;
}

const char* variable_name(Variable v) {
    switch (v) {
        case Variable::Do: return "do";
        case Variable::Ph: return "ph";
        case Variable::Chlorophyll: return "chlorophyll";
        case Variable::WaterTemp: return "water_temp";
        case Variable::AirTemp: return "air_temp";
        case Variable::AirTempForecast: return "air_temp_forecast";
    }
    return "?";
}

Variable variable_from_name(const std::string& name) {
    if (name == "do") return Variable::Do;
    if (name == "ph") return Variable::Ph;
    if (name == "chlorophyll") return Variable::Chlorophyll;
    if (name == "water_temp") return Variable::WaterTemp;
    if (name == "air_temp") return Variable::AirTemp;
    if (name == "air_temp_forecast") return Variable::AirTempForecast;
    throw std::invalid_argument("unknown variable: " + name);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

std::vector<TimeSeries> load_sensor_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    if (split_csv_line(line) != std::vector<std::string>{"timestamp", "sensor_id",
                                                         "variable", "value"}) {
        throw std::runtime_error(path + ": unexpected header");
    }

    struct Key {
        std::string sensor;
        Variable var;
        bool operator<(const Key& o) const {
            if (sensor != o.sensor) return sensor < o.sensor;
            return static_cast<int>(var) < static_cast<int>(o.var);
        }
    };
    std::map<Key, std::map<Timestamp, double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 4) {
            throw std::runtime_error(path + ": row " + std::to_string(lineno) +
                                     ": expected 4 fields");
        }
        Timestamp t;
        try {
            t = parse_iso8601(f[0]);
        } catch (const std::exception&) {
            throw std::runtime_error(path + ": row " + std::to_string(lineno) +
                                     ": malformed timestamp");
        }
        if (t % kStepSeconds != 0) {
            throw std::runtime_error(path + ": row " + std::to_string(lineno) +
                                     ": off-grid timestamp");
        }
        Variable var;
        try {
            var = variable_from_name(f[2]);
        } catch (const std::exception&) {
            throw std::runtime_error(path + ": row " + std::to_string(lineno) +
                                     ": unknown variable " + f[2]);
        }
        double v = f[3].empty() ? kMissing : std::stod(f[3]);
        auto& bucket = rows[{f[1], var}];
        if (!bucket.emplace(t, v).second) {
            throw std::runtime_error(path + ": row " + std::to_string(lineno) +
                                     ": duplicate timestamp");
        }
    }

    std::vector<TimeSeries> out;
    for (auto& [key, bucket] : rows) {
        TimeSeries ts;
        ts.sensor_id = key.sensor;
        ts.variable = key.var;
        ts.start = bucket.begin()->first;
        Timestamp end = bucket.rbegin()->first;
        ts.values.assign((end - ts.start) / kStepSeconds + 1, kMissing);
        for (auto& [t, v] : bucket) ts.values[(t - ts.start) / kStepSeconds] = v;
        out.push_back(std::move(ts));
    }
    return out;
}

void save_sensor_csv(const std::string& path, const std::vector<TimeSeries>& series) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "timestamp,sensor_id,variable,value\n";
    char buf[64];
    for (const auto& ts : series) {
        for (std::size_t i = 0; i < ts.values.size(); ++i) {
            out << format_iso8601(ts.time_at(i)) << ',' << ts.sensor_id << ','
                << variable_name(ts.variable) << ',';
            if (!is_missing(ts.values[i])) {
                std::snprintf(buf, sizeof buf, "%.17g", ts.values[i]);
                out << buf;
            }
            out << '\n';
        }
    }
}

std::vector<ForecastIssue> load_forecast_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    if (split_csv_line(line) !=
        std::vector<std::string>{"issued_at", "valid_at", "air_temp_forecast"}) {
        throw std::runtime_error(path + ": unexpected header");
    }
    std::map<Timestamp, ForecastIssue> issues;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 3) {
            throw std::runtime_error(path + ": row " + std::to_string(lineno) +
                                     ": expected 3 fields");
        }
        Timestamp issued = parse_iso8601(f[0]);
        Timestamp valid = parse_iso8601(f[1]);
        double v = std::stod(f[2]);
        auto& iss = issues[issued];
        iss.issued_at = issued;
        iss.valid_at.push_back(valid);
        iss.air_temp.push_back(v);
    }
    std::vector<ForecastIssue> out;
    for (auto& [t, iss] : issues) out.push_back(std::move(iss));
    return out;
}

void save_forecast_csv(const std::string& path, const std::vector<ForecastIssue>& issues) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "issued_at,valid_at,air_temp_forecast\n";
    char buf[64];
    for (const auto& iss : issues) {
        for (std::size_t i = 0; i < iss.valid_at.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", iss.air_temp[i]);
            out << format_iso8601(iss.issued_at) << ',' << format_iso8601(iss.valid_at[i])
                << ',' << buf << '\n';
        }
    }
}

TimeSeries resample_forecast(const ForecastIssue& issue) {
    if (issue.valid_at.size() < 2) throw std::invalid_argument("resample_forecast: too few points");
    for (std::size_t i = 1; i < issue.valid_at.size(); ++i) {
        if (issue.valid_at[i] - issue.valid_at[i - 1] != 3600) {
            throw std::invalid_argument("resample_forecast: not an hourly grid");
        }
    }
    Timestamp t0 = issue.valid_at.front();
    Timestamp t1 = issue.valid_at.back();
    if (t1 - t0 < 24 * 3600) {
        throw std::invalid_argument("resample_forecast: horizon shorter than 24 h");
    }
    TimeSeries out;
    out.sensor_id = "forecast";
    out.variable = Variable::AirTempForecast;
    out.start = t0;
    std::size_t n = (t1 - t0) / kStepSeconds + 1;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Timestamp t = t0 + static_cast<Timestamp>(i) * kStepSeconds;
        std::size_t hi = (t - t0) / 3600;
        if (t == issue.valid_at[hi]) {
            out.values[i] = issue.air_temp[hi];
        } else {
            double frac = static_cast<double>(t - issue.valid_at[hi]) / 3600.0;
            out.values[i] = issue.air_temp[hi] +
                            frac * (issue.air_temp[hi + 1] - issue.air_temp[hi]);
        }
    }
    return out;
}

} // namespace aqua
