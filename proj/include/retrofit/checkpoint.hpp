#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "retrofit/network.hpp"

namespace retrofit {

// Training provenance stored alongside the architecture.
struct CheckpointMeta {
    std::uint64_t seed = 0;
    std::size_t epochs = 0;
    double adversarial_mix = 0.0;
    double fgsm_epsilon = 0.0;
    std::map<std::string, std::string> extra;
};

// Container layout: 8-byte magic, little-endian u64 header length, JSON
// header (format version, architecture, metadata, blob directory with
// per-blob CRC32), then raw little-endian float64 blobs. Loading verifies
// magic, version, and every checksum; round trips are bit-exact.
void save_checkpoint(const Network& net, const std::string& path, const CheckpointMeta& meta = {});

struct LoadedCheckpoint {
    Network network;
    CheckpointMeta meta;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

// CRC32 over the serialized parameter blobs in name order; used to prove
// retrofitting leaves parameters untouched and to identify models in reports.
std::uint32_t parameter_checksum(const Network& net);

// Short stable identifier: checksum of parameters + architecture.
std::string model_id(const Network& net);

}  // namespace retrofit
