/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#include "gsedit/ply.hpp"
#include "gsedit/error.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

static_assert(std::endian::native == std::endian::little, "PLY I/O assumes a little-endian host");

namespace gsedit {

    namespace {

        enum class ScalarType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

        std::optional<ScalarType> parse_scalar_type(const std::string& s) {
            static const std::map<std::string, ScalarType> table = {
                {"char", ScalarType::Int8},     {"int8", ScalarType::Int8},      {"uchar", ScalarType::UInt8},
                {"uint8", ScalarType::UInt8},   {"short", ScalarType::Int16},    {"int16", ScalarType::Int16},
                {"ushort", ScalarType::UInt16}, {"uint16", ScalarType::UInt16},  {"int", ScalarType::Int32},
                {"int32", ScalarType::Int32},   {"uint", ScalarType::UInt32},    {"uint32", ScalarType::UInt32},
                {"float", ScalarType::Float32}, {"float32", ScalarType::Float32}, {"double", ScalarType::Float64},
                {"float64", ScalarType::Float64}};
            const auto it = table.find(s);
            if (it == table.end())
                return std::nullopt;
            return it->second;
        }

        std::size_t scalar_size(ScalarType t) {
            switch (t) {
            case ScalarType::Int8:
            case ScalarType::UInt8: return 1;
            case ScalarType::Int16:
            case ScalarType::UInt16: return 2;
            case ScalarType::Int32:
            case ScalarType::UInt32:
            case ScalarType::Float32: return 4;
            case ScalarType::Float64: return 8;
            }
            return 0;
        }

        template <typename T>
        T load_as(const char* p) {
            T v;
            std::memcpy(&v, p, sizeof(T));
            return v;
        }

        double read_scalar(ScalarType t, const char* p) {
            switch (t) {
            case ScalarType::Int8: return load_as<std::int8_t>(p);
            case ScalarType::UInt8: return load_as<std::uint8_t>(p);
            case ScalarType::Int16: return load_as<std::int16_t>(p);
            case ScalarType::UInt16: return load_as<std::uint16_t>(p);
            case ScalarType::Int32: return load_as<std::int32_t>(p);
            case ScalarType::UInt32: return load_as<std::uint32_t>(p);
            case ScalarType::Float32: return load_as<float>(p);
            case ScalarType::Float64: return load_as<double>(p);
            }
            return 0.0;
        }

        struct Property {
            std::string name;
            ScalarType type;
            std::size_t offset;
        };

        int degree_from_rest_count(std::size_t rest) {
            for (int d = 0; d <= kMaxShDegree; ++d) {
                if (rest == static_cast<std::size_t>(3 * (sh_coeff_count(d) - 1)))
                    return d;
            }
            return -1;
        }

    } // namespace

    GaussianScene read_ply(std::istream& in) {
        std::string line;
        if (!std::getline(in, line) || line.rfind("ply", 0) != 0) {
            fail(ErrorCode::Format, "not a PLY file (missing 'ply' magic)");
        }

        std::size_t vertex_count = 0;
        bool in_vertex = false;
        bool seen_vertex = false;
        bool format_ok = false;
        std::vector<Property> props;
        std::size_t stride = 0;

        while (true) {
            if (!std::getline(in, line)) {
                fail(ErrorCode::Format, "unexpected end of PLY header");
            }
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            std::istringstream ls(line);
            std::string keyword;
            ls >> keyword;
            if (keyword == "end_header")
                break;
            if (keyword == "format") {
                std::string fmt;
                ls >> fmt;
                if (fmt != "binary_little_endian") {
                    fail(ErrorCode::Format, "unsupported PLY format '" + fmt + "' (binary_little_endian required)");
                }
                format_ok = true;
            } else if (keyword == "element") {
                std::string name;
                std::size_t count = 0;
                ls >> name >> count;
                if (name == "vertex") {
                    if (seen_vertex)
                        fail(ErrorCode::Format, "duplicate vertex element");
                    vertex_count = count;
                    in_vertex = true;
                    seen_vertex = true;
                } else {
                    if (!seen_vertex && count > 0) {
                        fail(ErrorCode::Format, "element '" + name + "' precedes the vertex element");
                    }
                    in_vertex = false;
                }
            } else if (keyword == "property") {
                std::string type_name, name;
                ls >> type_name;
                if (type_name == "list") {
                    if (in_vertex)
                        fail(ErrorCode::Format, "list properties are not supported on vertices");
                    continue;
                }
                ls >> name;
                if (!in_vertex)
                    continue;
                const auto type = parse_scalar_type(type_name);
                if (!type)
                    fail(ErrorCode::Format, "unknown property type '" + type_name + "'");
                props.push_back({name, *type, stride});
                stride += scalar_size(*type);
            }
        }
        if (!format_ok)
            fail(ErrorCode::Format, "missing PLY format line");
        if (!seen_vertex)
            fail(ErrorCode::Format, "missing vertex element");

        std::map<std::string, const Property*> by_name;
        for (const auto& p : props) {
            by_name[p.name] = &p;
        }
        const auto require = [&](const std::string& name) -> const Property& {
            const auto it = by_name.find(name);
            if (it == by_name.end()) {
                fail(ErrorCode::Format, "missing required property '" + name + "'");
            }
            return *it->second;
        };

        std::size_t rest_count = 0;
        while (by_name.count("f_rest_" + std::to_string(rest_count))) {
            ++rest_count;
        }
        const int degree = degree_from_rest_count(rest_count);
        if (degree < 0) {
            fail(ErrorCode::Format, "f_rest property count " + std::to_string(rest_count) +
                                        " does not match any SH degree in [0,3]");
        }

        const std::array<std::string, 14> fixed_names = {"x",       "y",       "z",       "f_dc_0", "f_dc_1",
                                                         "f_dc_2",  "opacity", "scale_0", "scale_1", "scale_2",
                                                         "rot_0",   "rot_1",   "rot_2",   "rot_3"};
        std::array<const Property*, 14> fixed{};
        for (std::size_t k = 0; k < fixed_names.size(); ++k) {
            fixed[k] = &require(fixed_names[k]);
        }
        std::vector<const Property*> rest(rest_count);
        for (std::size_t k = 0; k < rest_count; ++k) {
            rest[k] = by_name.at("f_rest_" + std::to_string(k));
        }

        GaussianScene scene;
        scene.sh_degree = degree;
        scene.gaussians.resize(vertex_count);
        const int n_coeffs = sh_coeff_count(degree);
        const std::size_t rest_per_channel = static_cast<std::size_t>(n_coeffs - 1);

        std::vector<char> buf(stride * vertex_count);
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
            fail(ErrorCode::Format, "truncated PLY payload: expected " + std::to_string(vertex_count) + " vertices");
        }

        for (std::size_t i = 0; i < vertex_count; ++i) {
            const char* row = buf.data() + i * stride;
            const auto get = [&](const Property* p) { return read_scalar(p->type, row + p->offset); };
            auto& g = scene.gaussians[i];
            g.position = {get(fixed[0]), get(fixed[1]), get(fixed[2])};
            g.sh.assign(static_cast<std::size_t>(n_coeffs), Vec3::Zero());
            g.sh[0] = {get(fixed[3]), get(fixed[4]), get(fixed[5])};
            for (std::size_t c = 0; c < 3; ++c) {
                for (std::size_t k = 0; k < rest_per_channel; ++k) {
                    g.sh[k + 1][static_cast<Eigen::Index>(c)] = get(rest[c * rest_per_channel + k]);
                }
            }
            g.opacity_logit = get(fixed[6]);
            g.scale_log = {get(fixed[7]), get(fixed[8]), get(fixed[9])};
            g.rotation = {get(fixed[10]), get(fixed[11]), get(fixed[12]), get(fixed[13])};

            bool finite = g.position.allFinite() && std::isfinite(g.opacity_logit) && g.scale_log.allFinite() &&
                          g.rotation.allFinite();
            for (const auto& c : g.sh)
                finite = finite && c.allFinite();
            if (!finite) {
                fail(ErrorCode::Validation, "non-finite attribute at vertex " + std::to_string(i));
            }
        }
        return scene;
    }

    GaussianScene load_ply(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            fail(ErrorCode::Io, "cannot open " + path.string());
        }
        return read_ply(in);
    }

    void write_ply(const GaussianScene& scene, std::ostream& out) {
        scene.validate();
        const int n_coeffs = sh_coeff_count(scene.sh_degree);
        const int rest = 3 * (n_coeffs - 1);

        std::ostringstream header;
        header << "ply\nformat binary_little_endian 1.0\nelement vertex " << scene.size() << "\n";
        for (const char* name : {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"}) {
            header << "property float " << name << "\n";
        }
        for (int k = 0; k < rest; ++k) {
            header << "property float f_rest_" << k << "\n";
        }
        for (const char* name : {"opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"}) {
            header << "property float " << name << "\n";
        }
        header << "end_header\n";
        const std::string h = header.str();
        out.write(h.data(), static_cast<std::streamsize>(h.size()));

        std::vector<float> row;
        row.reserve(static_cast<std::size_t>(17 + rest));
        for (const auto& g : scene.gaussians) {
            row.clear();
            const auto push = [&](double v) { row.push_back(static_cast<float>(v)); };
            push(g.position.x());
            push(g.position.y());
            push(g.position.z());
            push(0.0);
            push(0.0);
            push(0.0);
            push(g.sh[0].x());
            push(g.sh[0].y());
            push(g.sh[0].z());
            for (int c = 0; c < 3; ++c) {
                for (int k = 1; k < n_coeffs; ++k) {
                    push(g.sh[static_cast<std::size_t>(k)][c]);
                }
            }
            push(g.opacity_logit);
            for (int k = 0; k < 3; ++k)
                push(g.scale_log[k]);
            for (int k = 0; k < 4; ++k)
                push(g.rotation[k]);
            out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
        }
        if (!out) {
            fail(ErrorCode::Io, "failed writing PLY payload");
        }
    }

    void save_ply(const GaussianScene& scene, const std::filesystem::path& path) {
        if (path.has_parent_path()) {
            std::filesystem::create_directories(path.parent_path());
        }
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
        }
        write_ply(scene, out);
    }

} // namespace gsedit
