#pragma once

#include <map>
#include <string>

namespace qdet {

/// Reproducibility record written next to every CLI output: the resolved
/// spec, all flags, seeds and content digests of the produced files.
/// Re-running with the same manifest must reproduce the digests.
struct RunManifest {
    std::string version;
    std::string subcommand;
    std::string spec_echo;
    std::map<std::string, std::string> flags;
    uint64_t seed = 0;
    double wall_seconds = 0.0;
    std::map<std::string, std::string> output_digests;  // path -> fnv1a-64 hex
};

void write_manifest(const RunManifest& m, const std::string& path);
RunManifest read_manifest(const std::string& path);

}  // namespace qdet
