#include "laplace/model_io.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "laplace/num_format.hpp"

namespace laplace {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument("model file: " + path + ": " + what);
}

int require_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

std::map<int, SymTensor> read_table(const json& j, const std::string& path, int d,
                                    int min_order, int max_order) {
    if (!j.is_object()) fail(path, "expected an object keyed by derivative order");
    std::map<int, SymTensor> out;
    for (const auto& [key, entries] : j.items()) {
        const std::string opath = path + "." + key;
        int order = 0;
        try {
            std::size_t used = 0;
            order = std::stoi(key, &used);
            if (used != key.size()) throw std::invalid_argument(key);
        } catch (...) {
            fail(opath, "order key is not an integer");
        }
        if (order < min_order || order > max_order)
            fail(opath, "order outside " + std::to_string(min_order) + ".." +
                            std::to_string(max_order));
        if (!entries.is_array()) fail(opath, "expected a list of [indices, value] pairs");
        SymTensor T(order, d);
        std::set<std::vector<int>> seen;
        for (std::size_t e = 0; e < entries.size(); ++e) {
            const std::string epath = opath + "[" + std::to_string(e) + "]";
            const json& entry = entries[e];
            if (!entry.is_array() || entry.size() != 2) fail(epath, "expected [indices, value]");
            const json& idx = entry[0];
            if (!idx.is_array() || static_cast<int>(idx.size()) != order)
                fail(epath + "[0]", "index list must have length " + std::to_string(order));
            std::vector<int> zero_based(order);
            for (int s = 0; s < order; ++s) {
                const std::string spath = epath + "[0][" + std::to_string(s) + "]";
                int v = require_int(idx[s], spath);
                if (v < 1 || v > d) fail(spath, "index outside 1.." + std::to_string(d));
                if (s > 0 && v < zero_based[s - 1] + 1) fail(epath + "[0]", "indices must be sorted");
                zero_based[s] = v - 1;
            }
            if (!entry[1].is_number()) fail(epath + "[1]", "expected a number");
            double value = entry[1].get<double>();
            if (!std::isfinite(value)) fail(epath + "[1]", "value must be finite");
            if (!seen.insert(zero_based).second) fail(epath, "duplicate permutation class");
            T.set(zero_based, value);
        }
        if (!T.is_zero()) out.emplace(order, std::move(T));
    }
    return out;
}

void write_table(std::ostream& os, const std::map<int, SymTensor>& table, const char* name) {
    os << "  \"" << name << "\": {";
    bool first_order = true;
    for (const auto& [order, T] : table) {
        if (T.is_zero()) continue;
        os << (first_order ? "\n" : ",\n") << "    \"" << order << "\": [";
        first_order = false;
        bool first_entry = true;
        T.for_each_class([&](std::span<const int> idx, double v) {
            if (v == 0.0) return;
            os << (first_entry ? "\n" : ",\n") << "      [[";
            first_entry = false;
            for (std::size_t s = 0; s < idx.size(); ++s) os << (s ? ", " : "") << idx[s] + 1;
            os << "], " << double_to_string(v) << "]";
        });
        os << (first_entry ? "]" : "\n    ]");
    }
    os << (first_order ? "}" : "\n  }");
}

}  // namespace

Model model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("model file: ") + e.what());
    }
    if (!j.is_object()) fail("$", "top level must be an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "d" && key != "L" && key != "f_derivatives" && key != "log_g_derivatives" &&
            key != "label")
            fail(key, "unknown field");
    }
    if (!j.contains("d")) fail("d", "missing field");
    if (!j.contains("L")) fail("L", "missing field");
    Model m;
    m.d = require_int(j["d"], "d");
    m.L = require_int(j["L"], "L");
    if (m.d < 1) fail("d", "must be at least 1");
    if (m.L < 1) fail("L", "must be at least 1");
    if (j.contains("label")) {
        if (!j["label"].is_string()) fail("label", "expected a string");
        m.label = j["label"].get<std::string>();
    }
    if (j.contains("f_derivatives"))
        m.f_tensors = read_table(j["f_derivatives"], "f_derivatives", m.d, 3, 2 * m.L + 1);
    if (j.contains("log_g_derivatives"))
        m.logg_tensors =
            read_table(j["log_g_derivatives"], "log_g_derivatives", m.d, 1, 2 * m.L - 1);
    m.validate();
    return m;
}

std::string model_to_json(const Model& m) {
    std::ostringstream os;
    os << "{\n  \"d\": " << m.d << ",\n  \"L\": " << m.L << ",\n";
    if (!m.label.empty()) os << "  \"label\": " << json(m.label).dump() << ",\n";
    write_table(os, m.f_tensors, "f_derivatives");
    os << ",\n";
    write_table(os, m.logg_tensors, "log_g_derivatives");
    os << "\n}\n";
    return os.str();
}

}  // namespace laplace
