#pragma once

// Grid checkpoints: <base>.bin holds, field after field, N^3 complex values in
// row-major (x, y, z) order, each as two little-endian IEEE-754 doubles (re, im).
// Real gauge components are stored with im = 0. <base>.json is the sidecar
// {"N", "model", "field-names", "eps"}.

#include "json.hpp"

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

#include "cmw/catalog_json.hpp"
#include "cmw/monopole.hpp"

namespace cmw {

inline const std::vector<std::string>& grid_field_names() {
    static const std::vector<std::string> names{"alpha", "beta1bar", "a0", "a1", "a2"};
    return names;
}

namespace detail {

inline void put_le(std::string& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
}

inline double get_le(const std::string& in, std::size_t offset) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + b])) << (8 * b);
    return std::bit_cast<double>(bits);
}

inline std::filesystem::path with_suffix(const std::filesystem::path& base, const std::string& ext) {
    return std::filesystem::path(base.string() + ext);
}

}  // namespace detail

inline nlohmann::json grid_sidecar(const MonopoleState<HeisGrid>& s) {
    nlohmann::json j;
    j["N"] = s.backend().n();
    j["model"] = s.model().name();
    j["field-names"] = grid_field_names();
    j["eps"] = s.eps ? nlohmann::json(to_string(*s.eps)) : nlohmann::json(nullptr);
    return j;
}

inline std::string encode_grid_fields(const MonopoleState<HeisGrid>& s) {
    const std::size_t n = s.backend().sites();
    std::string out;
    out.reserve(5 * n * 16);
    for (const auto* f : {&s.phi.alpha, &s.phi.beta})
        for (const auto& z : *f) {
            detail::put_le(out, z.re);
            detail::put_le(out, z.im);
        }
    for (const auto& c : s.a.comp)
        for (double v : c) {
            detail::put_le(out, v);
            detail::put_le(out, 0.0);
        }
    return out;
}

inline void write_grid_fields(const std::filesystem::path& base, const MonopoleState<HeisGrid>& s) {
    const std::string bytes = encode_grid_fields(s);
    std::ofstream bin(detail::with_suffix(base, ".bin"), std::ios::binary | std::ios::trunc);
    if (!bin) throw std::runtime_error("cannot open '" + detail::with_suffix(base, ".bin").string() + "' for writing");
    bin.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    std::ofstream side(detail::with_suffix(base, ".json"), std::ios::trunc);
    if (!side) throw std::runtime_error("cannot open '" + detail::with_suffix(base, ".json").string() + "' for writing");
    side << grid_sidecar(s).dump(2) << "\n";
    if (!bin || !side) throw std::runtime_error("write failed for checkpoint '" + base.string() + "'");
}

inline MonopoleState<HeisGrid> decode_grid_fields(const nlohmann::json& sidecar, const std::string& bytes) {
    if (!sidecar.contains("N") || !sidecar["N"].is_number_integer()) throw ParseError("sidecar needs integer 'N'");
    if (sidecar.value("field-names", nlohmann::json::array()) != nlohmann::json(grid_field_names()))
        throw ParseError("sidecar field-names do not match the grid layout");
    const ModelStructure m = catalog_model(sidecar.value("model", std::string("heisenberg")));
    auto grid = std::make_shared<const HeisGrid>(sidecar["N"].get<int>(), m);
    const std::size_t n = grid->sites();
    if (bytes.size() != 5 * n * 16)
        throw ParseError("binary size " + std::to_string(bytes.size()) + " does not match N^3 x 5 complex values");
    std::optional<Rational> eps;
    if (sidecar.contains("eps") && !sidecar["eps"].is_null()) eps = rational_from_json(sidecar["eps"], "eps");
    MonopoleState<HeisGrid> s{GaugeField<HeisGrid>::zero(grid), SpinorField<HeisGrid>::zero(grid), eps};
    std::size_t off = 0;
    for (auto* f : {&s.phi.alpha, &s.phi.beta})
        for (auto& z : *f) {
            z = DComplex(detail::get_le(bytes, off), detail::get_le(bytes, off + 8));
            off += 16;
        }
    for (auto& c : s.a.comp)
        for (double& v : c) {
            v = detail::get_le(bytes, off);
            if (detail::get_le(bytes, off + 8) != 0.0) throw ParseError("gauge component has nonzero imaginary part");
            off += 16;
        }
    return s;
}

inline MonopoleState<HeisGrid> read_grid_fields(const std::filesystem::path& base) {
    std::ifstream side(detail::with_suffix(base, ".json"));
    if (!side) throw std::runtime_error("cannot open sidecar for '" + base.string() + "'");
    const nlohmann::json j = nlohmann::json::parse(side);
    std::ifstream bin(detail::with_suffix(base, ".bin"), std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open binary for '" + base.string() + "'");
    const std::string bytes((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
    return decode_grid_fields(j, bytes);
}

}  // namespace cmw
