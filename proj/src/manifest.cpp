#include "qdet/manifest.hpp"

#include "qdet/errors.hpp"

#include <json.hpp>

#include <fstream>

namespace qdet {

void write_manifest(const RunManifest& m, const std::string& path) {
    nlohmann::json j;
    j["version"] = m.version;
    j["subcommand"] = m.subcommand;
    j["spec"] = m.spec_echo;
    j["flags"] = m.flags;
    j["seed"] = m.seed;
    j["wall_seconds"] = m.wall_seconds;
    j["output_digests"] = m.output_digests;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write manifest: " + path);
    out << j.dump(2) << "\n";
}

RunManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest: " + path);
    nlohmann::json j;
    in >> j;
    RunManifest m;
    m.version = j.value("version", "");
    m.subcommand = j.value("subcommand", "");
    m.spec_echo = j.value("spec", "");
    m.seed = j.value("seed", 0ULL);
    m.wall_seconds = j.value("wall_seconds", 0.0);
    if (j.contains("flags"))
        for (auto& [k, v] : j["flags"].items()) m.flags[k] = v.get<std::string>();
    if (j.contains("output_digests"))
        for (auto& [k, v] : j["output_digests"].items())
            m.output_digests[k] = v.get<std::string>();
    return m;
}

}  // namespace qdet
