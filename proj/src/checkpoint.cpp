#include "retrofit/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "retrofit/error.hpp"

namespace retrofit {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'R', 'F', 'C', 'K', 'P', 'T', '0', '1'};
constexpr int kFormatVersion = 1;

void append_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t read_u64_le(const char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
}

std::string doubles_to_le_bytes(const std::vector<double>& data) {
    std::string out;
    out.reserve(data.size() * 8);
    for (double d : data) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(d);
        append_u64_le(out, bits);
    }
    return out;
}

std::vector<double> le_bytes_to_doubles(const char* p, std::size_t count) {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = std::bit_cast<double>(read_u64_le(p + i * 8));
    }
    return out;
}

std::uint32_t crc_of(const std::string& bytes) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

json activation_to_json(const ActivationSpec& a) {
    return json{{"kind", to_string(a.kind)}, {"kappa", a.kappa},  {"kappa_lo", a.kappa_lo},
                {"kappa_hi", a.kappa_hi},    {"beta", a.beta}};
}

ActivationSpec activation_from_json(const json& j) {
    ActivationSpec a;
    a.kind = activation_kind_from_string(j.at("kind").get<std::string>());
    a.kappa = j.at("kappa").get<double>();
    a.kappa_lo = j.at("kappa_lo").get<double>();
    a.kappa_hi = j.at("kappa_hi").get<double>();
    a.beta = j.at("beta").get<double>();
    return a;
}

json layer_to_json(const LayerSpec& l) {
    json j{{"kind", to_string(l.kind)}};
    switch (l.kind) {
        case LayerKind::dense:
            j["in"] = l.in;
            j["out"] = l.out;
            break;
        case LayerKind::conv2d:
            j["kh"] = l.kh;
            j["kw"] = l.kw;
            j["cin"] = l.cin;
            j["cout"] = l.cout;
            j["pad"] = l.pad;
            break;
        case LayerKind::dropout:
            j["rate"] = l.rate;
            break;
        case LayerKind::activation:
            j["activation"] = activation_to_json(l.activation);
            break;
        default:
            break;
    }
    return j;
}

LayerSpec layer_from_json(const json& j) {
    LayerSpec l;
    l.kind = layer_kind_from_string(j.at("kind").get<std::string>());
    switch (l.kind) {
        case LayerKind::dense:
            l.in = j.at("in").get<std::size_t>();
            l.out = j.at("out").get<std::size_t>();
            break;
        case LayerKind::conv2d:
            l.kh = j.at("kh").get<std::size_t>();
            l.kw = j.at("kw").get<std::size_t>();
            l.cin = j.at("cin").get<std::size_t>();
            l.cout = j.at("cout").get<std::size_t>();
            l.pad = j.at("pad").get<std::size_t>();
            break;
        case LayerKind::dropout:
            l.rate = j.at("rate").get<double>();
            break;
        case LayerKind::activation:
            l.activation = activation_from_json(j.at("activation"));
            break;
        default:
            break;
    }
    return l;
}

}  // namespace

void save_checkpoint(const Network& net, const std::string& path, const CheckpointMeta& meta) {
    json header;
    header["format_version"] = kFormatVersion;
    json arch = json::array();
    for (const LayerSpec& l : net.layers()) arch.push_back(layer_to_json(l));
    header["architecture"] = arch;
    header["input_shape"] = net.input_shape();
    header["metadata"] = {{"seed", meta.seed},
                          {"epochs", meta.epochs},
                          {"adversarial_mix", meta.adversarial_mix},
                          {"fgsm_epsilon", meta.fgsm_epsilon},
                          {"extra", meta.extra}};

    std::string blob_area;
    json blobs = json::array();
    for (const auto& [name, tensor] : net.parameters()) {
        std::string bytes = doubles_to_le_bytes(tensor.values());
        blobs.push_back(json{{"name", name},
                             {"shape", tensor.shape()},
                             {"offset", blob_area.size()},
                             {"byte_size", bytes.size()},
                             {"crc32", crc_of(bytes)}});
        blob_area += bytes;
    }
    header["blobs"] = blobs;

    const std::string header_str = header.dump();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(kMagic, sizeof(kMagic));
    std::string len;
    append_u64_le(len, header_str.size());
    out.write(len.data(), 8);
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    out.write(blob_area.data(), static_cast<std::streamsize>(blob_area.size()));
    if (!out) throw IoError("failed while writing " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string file = ss.str();
    if (file.size() < 16 || std::memcmp(file.data(), kMagic, sizeof(kMagic)) != 0) {
        throw FormatError("not a checkpoint file: " + path);
    }
    const std::uint64_t header_len = read_u64_le(file.data() + 8);
    if (16 + header_len > file.size()) throw FormatError("truncated checkpoint header: " + path);

    json header;
    try {
        header = json::parse(file.substr(16, header_len));
    } catch (const json::exception& e) {
        throw FormatError("corrupt checkpoint header: " + std::string(e.what()));
    }
    const int version = header.at("format_version").get<int>();
    if (version != kFormatVersion) {
        throw FormatError("unsupported checkpoint format version " + std::to_string(version) + " (expected " +
                          std::to_string(kFormatVersion) + ")");
    }

    std::vector<LayerSpec> layers;
    for (const json& j : header.at("architecture")) layers.push_back(layer_from_json(j));
    Network net(std::move(layers));
    net.set_input_shape(header.at("input_shape").get<std::vector<std::size_t>>());

    const std::size_t blob_base = 16 + header_len;
    for (const json& b : header.at("blobs")) {
        const std::string name = b.at("name").get<std::string>();
        const auto shape = b.at("shape").get<std::vector<std::size_t>>();
        const std::size_t offset = b.at("offset").get<std::size_t>();
        const std::size_t byte_size = b.at("byte_size").get<std::size_t>();
        if (blob_base + offset + byte_size > file.size()) throw FormatError("truncated blob " + name);
        const std::string bytes = file.substr(blob_base + offset, byte_size);
        if (crc_of(bytes) != b.at("crc32").get<std::uint32_t>()) {
            throw FormatError("checksum mismatch in blob " + name);
        }
        Tensor t(shape, le_bytes_to_doubles(bytes.data(), byte_size / 8));
        net.parameter(name) = std::move(t);
    }

    CheckpointMeta meta;
    const json& m = header.at("metadata");
    meta.seed = m.at("seed").get<std::uint64_t>();
    meta.epochs = m.at("epochs").get<std::size_t>();
    meta.adversarial_mix = m.at("adversarial_mix").get<double>();
    meta.fgsm_epsilon = m.at("fgsm_epsilon").get<double>();
    meta.extra = m.at("extra").get<std::map<std::string, std::string>>();
    return {std::move(net), std::move(meta)};
}

std::uint32_t parameter_checksum(const Network& net) {
    uLong crc = ::crc32(0L, nullptr, 0);
    for (const auto& [name, tensor] : net.parameters()) {
        const std::string bytes = doubles_to_le_bytes(tensor.values());
        crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
    }
    return static_cast<std::uint32_t>(crc);
}

std::string model_id(const Network& net) {
    json arch = json::array();
    for (const LayerSpec& l : net.layers()) arch.push_back(layer_to_json(l));
    const std::string arch_str = arch.dump();
    uLong crc = ::crc32(0L, reinterpret_cast<const Bytef*>(arch_str.data()), static_cast<uInt>(arch_str.size()));
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%08x-%08x", static_cast<unsigned>(crc), parameter_checksum(net));
    return buf;
}

}  // namespace retrofit
