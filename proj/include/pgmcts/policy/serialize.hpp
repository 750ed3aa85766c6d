#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "pgmcts/errors.hpp"
#include "pgmcts/policy/conv_net.hpp"

namespace pgmcts::policy {

// File layout, all integers little-endian:
//   "PGMCTSNN"  u32 version  u64 architecture digest
//   i32 height  i32 width  i32 colors  i32 layer count  {i32 kernel, i32 filters, i32 same}*  u64 seed
//   u64 parameter count  f32 parameters...
inline constexpr char kModelMagic[8] = {'P', 'G', 'M', 'C', 'T', 'S', 'N', 'N'};
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

template <class U>
void put_le(std::string& out, U v) {
    using Bits = std::conditional_t<sizeof(U) == 4, std::uint32_t, std::uint64_t>;
    const auto bits = std::bit_cast<Bits>(v);
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
public:
    Reader(const std::string& data, std::string path) : data_(data), path_(std::move(path)) {}

    template <class U>
    U get(const char* what) {
        using Bits = std::conditional_t<sizeof(U) == 4, std::uint32_t, std::uint64_t>;
        if (pos_ + sizeof(U) > data_.size()) throw LoadError(path_ + ": truncated while reading " + what);
        Bits bits = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i)
            bits |= static_cast<Bits>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += sizeof(U);
        return std::bit_cast<U>(bits);
    }

    void bytes(char* dst, std::size_t n, const char* what) {
        if (pos_ + n > data_.size()) throw LoadError(path_ + ": truncated while reading " + what);
        std::memcpy(dst, data_.data() + pos_, n);
        pos_ += n;
    }

    bool at_end() const noexcept { return pos_ == data_.size(); }

private:
    const std::string& data_;
    std::string path_;
    std::size_t pos_ = 0;
};

}  // namespace detail

template <std::floating_point T>
std::string serialize_model(const ConvPolicyNet<T>& net) {
    const auto& cfg = net.config();
    std::string out(kModelMagic, sizeof(kModelMagic));
    detail::put_le(out, kModelVersion);
    detail::put_le(out, cfg.digest());
    detail::put_le(out, static_cast<std::int32_t>(cfg.board_height));
    detail::put_le(out, static_cast<std::int32_t>(cfg.board_width));
    detail::put_le(out, static_cast<std::int32_t>(cfg.colors));
    detail::put_le(out, static_cast<std::int32_t>(cfg.layers.size()));
    for (const auto& l : cfg.layers) {
        detail::put_le(out, static_cast<std::int32_t>(l.kernel));
        detail::put_le(out, static_cast<std::int32_t>(l.filters));
        detail::put_le(out, static_cast<std::int32_t>(l.same_padding ? 1 : 0));
    }
    detail::put_le(out, cfg.seed);
    detail::put_le(out, static_cast<std::uint64_t>(net.parameter_count()));
    for (T p : net.parameters()) detail::put_le(out, static_cast<float>(p));
    return out;
}

/**
 * Parses a serialized model. If `expected` is given, its architecture must
 * match the stored one exactly.
 */
template <std::floating_point T = float>
ConvPolicyNet<T> deserialize_model(const std::string& data, const std::string& source = "<memory>",
                                   const std::optional<ConvPolicyConfig>& expected = std::nullopt) {
    detail::Reader in(data, source);
    char magic[sizeof(kModelMagic)];
    in.bytes(magic, sizeof(magic), "magic");
    if (std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) throw LoadError(source + ": not a model file");
    const auto version = in.get<std::uint32_t>("version");
    if (version != kModelVersion)
        throw LoadError(source + ": unsupported model version " + std::to_string(version));
    const auto digest = in.get<std::uint64_t>("digest");
    ConvPolicyConfig cfg;
    cfg.board_height = in.get<std::int32_t>("height");
    cfg.board_width = in.get<std::int32_t>("width");
    cfg.colors = in.get<std::int32_t>("colors");
    const auto n_layers = in.get<std::int32_t>("layer count");
    if (n_layers < 1 || n_layers > 1024) throw LoadError(source + ": implausible layer count");
    for (std::int32_t i = 0; i < n_layers; ++i) {
        ConvLayerSpec l;
        l.kernel = in.get<std::int32_t>("kernel");
        l.filters = in.get<std::int32_t>("filters");
        l.same_padding = in.get<std::int32_t>("padding") != 0;
        cfg.layers.push_back(l);
    }
    cfg.seed = in.get<std::uint64_t>("seed");
    if (cfg.digest() != digest) throw LoadError(source + ": architecture digest mismatch (corrupt header)");
    if (expected && !expected->same_architecture(cfg))
        throw ConfigError(source + ": stored architecture (" + std::to_string(cfg.board_height) + "x" +
                          std::to_string(cfg.board_width) + ", " + std::to_string(cfg.colors) +
                          " colors) does not match the requested one");
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw LoadError(source + ": invalid stored architecture: " + e.what());
    }
    ConvPolicyNet<T> net(cfg);
    const auto count = in.get<std::uint64_t>("parameter count");
    if (count != net.parameter_count())
        throw LoadError(source + ": parameter count " + std::to_string(count) + " does not match architecture (" +
                        std::to_string(net.parameter_count()) + ")");
    auto params = net.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) params[i] = static_cast<T>(in.get<float>("parameters"));
    if (!in.at_end()) throw LoadError(source + ": trailing bytes after parameters");
    return net;
}

template <std::floating_point T>
void save_model(const ConvPolicyNet<T>& net, const std::filesystem::path& path) {
    const std::string data = serialize_model(net);
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw LoadError("cannot open " + tmp + " for writing");
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!out) throw LoadError("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

template <std::floating_point T = float>
ConvPolicyNet<T> load_model(const std::filesystem::path& path,
                            const std::optional<ConvPolicyConfig>& expected = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open model file " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model<T>(data, path.string(), expected);
}

}  // namespace pgmcts::policy
