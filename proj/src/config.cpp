#include "qdet/config.hpp"

#include "qdet/errors.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace qdet {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw ConfigError("trailing characters in value for " + key);
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        throw ConfigError("cannot parse number for key " + key + ": '" + v + "'");
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string cell;
    while (std::getline(is, cell, sep)) out.push_back(trim(cell));
    if (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

}  // namespace

ProblemSpec parse_config_text(const std::string& text) {
    static const std::vector<std::string> known = {"n",    "mu", "lambda", "c",      "pi0",
                                                   "mode", "k",  "probs",  "entries"};
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown config key: " + key);
        if (kv.count(key)) throw ConfigError("duplicate config key: " + key);
        kv[key] = value;
    }

    for (const char* req : {"n", "mu", "lambda", "c", "pi0", "mode"})
        if (!kv.count(req)) throw ConfigError(std::string("missing config key: ") + req);

    const int n = static_cast<int>(parse_number("n", kv["n"]));
    const double mu = parse_number("mu", kv["mu"]);
    const double lambda = parse_number("lambda", kv["lambda"]);
    const double c = parse_number("c", kv["c"]);
    const double pi0 = parse_number("pi0", kv["pi0"]);
    const std::string mode = kv["mode"];

    IndexFamily fam;
    if (mode == "exact") {
        if (!kv.count("k")) throw ConfigError("mode=exact requires key k");
        if (!kv.count("probs")) throw ConfigError("mode=exact requires key probs");
        if (kv.count("entries")) throw ConfigError("mode=exact does not accept entries");
        const int k = static_cast<int>(parse_number("k", kv["k"]));
        std::vector<double> probs;
        if (kv["probs"] == "uniform") {
            probs.assign(binomial(n, k), 1.0 / static_cast<double>(binomial(n, k)));
        } else {
            for (const auto& cell : split(kv["probs"], ','))
                probs.push_back(parse_number("probs", cell));
        }
        fam = build_family(n, k, probs);
    } else if (mode == "general") {
        if (!kv.count("entries")) throw ConfigError("mode=general requires key entries");
        if (kv.count("k") || kv.count("probs"))
            throw ConfigError("mode=general does not accept k/probs");
        std::vector<std::pair<std::vector<int>, double>> entries;
        for (const auto& item : split(kv["entries"], ';')) {
            if (item.empty()) continue;
            const size_t colon = item.find(':');
            if (colon == std::string::npos)
                throw ConfigError("entries item needs subset:prob, got '" + item + "'");
            std::vector<int> subset;
            for (const auto& cell : split(item.substr(0, colon), ','))
                subset.push_back(static_cast<int>(parse_number("entries", cell)));
            entries.emplace_back(subset, parse_number("entries", trim(item.substr(colon + 1))));
        }
        fam = build_general_family(n, entries);
    } else {
        throw ConfigError("mode must be exact or general, got '" + mode + "'");
    }

    return ProblemSpec(n, mu, lambda, c, pi0, std::move(fam));
}

ProblemSpec parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace qdet
