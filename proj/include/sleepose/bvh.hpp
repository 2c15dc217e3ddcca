// SPDX-License-Identifier: Apache-2.0
//
// BioVision Hierarchy (BVH) reader and writer.
#pragma once

#include "sleepose/rotations.hpp"

#include <Eigen/Core>

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace sleepose {

enum class Channel { Xposition, Yposition, Zposition, Xrotation, Yrotation, Zrotation };

inline std::optional<Channel> parse_channel(std::string_view tag) {
    if (tag == "Xposition") return Channel::Xposition;
    if (tag == "Yposition") return Channel::Yposition;
    if (tag == "Zposition") return Channel::Zposition;
    if (tag == "Xrotation") return Channel::Xrotation;
    if (tag == "Yrotation") return Channel::Yrotation;
    if (tag == "Zrotation") return Channel::Zrotation;
    return std::nullopt;
}

inline std::string_view to_string(Channel c) {
    switch (c) {
        case Channel::Xposition: return "Xposition";
        case Channel::Yposition: return "Yposition";
        case Channel::Zposition: return "Zposition";
        case Channel::Xrotation: return "Xrotation";
        case Channel::Yrotation: return "Yrotation";
        case Channel::Zrotation: return "Zrotation";
    }
    return "?";
}

inline bool is_rotation(Channel c) { return c >= Channel::Xrotation; }
inline int channel_axis(Channel c) { return static_cast<int>(c) % 3; }

struct BvhJoint {
    std::string name;
    int parent = -1;  ///< index into SkeletonAnimation::joints, -1 for the root
    Vec3 offset = Vec3::Zero();
    std::vector<Channel> channels;
    std::size_t first_channel = 0;  ///< column of channels[0] in the frame matrix
    bool end_site = false;
};

/// Parsed skeleton plus per-frame channel values (degrees / model units).
/// Joints are stored in declaration order, so every parent precedes its
/// children.
struct SkeletonAnimation {
    std::vector<BvhJoint> joints;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> frames;
    double frame_time = 1.0 / 30.0;

    std::size_t frame_count() const { return static_cast<std::size_t>(frames.rows()); }
    std::size_t channel_count() const { return static_cast<std::size_t>(frames.cols()); }

    std::optional<std::size_t> find_joint(std::string_view name) const {
        for (std::size_t i = 0; i < joints.size(); ++i) {
            if (joints[i].name == name) return i;
        }
        return std::nullopt;
    }

    std::size_t joint_index(std::string_view name) const {
        if (auto i = find_joint(name)) return *i;
        throw std::out_of_range("skeleton has no joint named '" + std::string(name) + "'");
    }
};

class BvhParseError : public std::runtime_error {
public:
    BvhParseError(std::size_t line, const std::string& what)
        : std::runtime_error("BVH line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

namespace detail {

struct BvhToken {
    std::string text;
    std::size_t line;
};

inline bool parse_double(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

class BvhHierarchyReader {
public:
    BvhHierarchyReader(std::vector<BvhToken> tokens, SkeletonAnimation& anim)
        : tokens_(std::move(tokens)), anim_(anim) {}

    std::size_t read() {
        expect("HIERARCHY");
        expect("ROOT");
        read_joint(-1, false);
        if (pos_ < tokens_.size()) {
            const auto& t = tokens_[pos_];
            throw BvhParseError(t.line, "unexpected token '" + t.text + "' after root joint (only one ROOT allowed)");
        }
        return channels_;
    }

private:
    const BvhToken& next(std::string_view what) {
        if (pos_ >= tokens_.size()) {
            const std::size_t line = tokens_.empty() ? 1 : tokens_.back().line;
            throw BvhParseError(line, "unexpected end of hierarchy, expected " + std::string(what));
        }
        return tokens_[pos_++];
    }

    void expect(std::string_view keyword) {
        const auto& t = next(keyword);
        if (t.text != keyword) {
            throw BvhParseError(t.line, "expected '" + std::string(keyword) + "', found '" + t.text + "'");
        }
    }

    double number() {
        const auto& t = next("a number");
        double v = 0.0;
        if (!parse_double(t.text, v)) throw BvhParseError(t.line, "expected a number, found '" + t.text + "'");
        return v;
    }

    Vec3 offset() {
        expect("OFFSET");
        const double x = number();
        const double y = number();
        const double z = number();
        return {x, y, z};
    }

    void read_joint(int parent, bool end_site) {
        BvhJoint joint;
        joint.parent = parent;
        joint.end_site = end_site;
        if (end_site) {
            expect("Site");
            joint.name = anim_.joints[static_cast<std::size_t>(parent)].name + "_End";
        } else {
            joint.name = next("a joint name").text;
        }
        expect("{");
        joint.offset = offset();
        if (!end_site) {
            expect("CHANNELS");
            const auto& count_tok = next("a channel count");
            double count = 0;
            if (!parse_double(count_tok.text, count) || count < 0 || count != std::floor(count) || count > 6) {
                throw BvhParseError(count_tok.line, "invalid channel count '" + count_tok.text + "'");
            }
            for (int c = 0; c < static_cast<int>(count); ++c) {
                const auto& tag = next("a channel tag");
                const auto ch = parse_channel(tag.text);
                if (!ch) throw BvhParseError(tag.line, "unknown channel tag '" + tag.text + "'");
                joint.channels.push_back(*ch);
            }
        }
        joint.first_channel = channels_;
        channels_ += joint.channels.size();
        const int self = static_cast<int>(anim_.joints.size());
        anim_.joints.push_back(std::move(joint));

        while (true) {
            const auto& t = next("'}'");
            if (t.text == "}") return;
            if (end_site) throw BvhParseError(t.line, "End Site may only contain OFFSET");
            if (t.text == "JOINT") {
                read_joint(self, false);
            } else if (t.text == "End") {
                read_joint(self, true);
            } else {
                throw BvhParseError(t.line, "unexpected token '" + t.text + "' in joint body");
            }
        }
    }

    std::vector<BvhToken> tokens_;
    std::size_t pos_ = 0;
    SkeletonAnimation& anim_;
    std::size_t channels_ = 0;
};

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace detail

/// Parses a BVH document. Joint order and channel order are kept exactly as
/// declared. Errors carry the 1-based line number of the offending token.
inline SkeletonAnimation parse_bvh(std::string_view text) {
    std::vector<std::string> lines;
    {
        std::size_t start = 0;
        while (start <= text.size()) {
            std::size_t end = text.find('\n', start);
            if (end == std::string_view::npos) end = text.size();
            std::string line(text.substr(start, end - start));
            if (!line.empty() && line.back() == '\r') line.pop_back();
            lines.push_back(std::move(line));
            if (end == text.size()) break;
            start = end + 1;
        }
    }

    std::size_t motion_line = 0;
    std::vector<detail::BvhToken> tokens;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto words = detail::split_ws(lines[i]);
        if (!words.empty() && words.front() == "MOTION") {
            motion_line = i + 1;
            break;
        }
        for (auto w : words) tokens.push_back({std::string(w), i + 1});
    }
    if (tokens.empty()) throw BvhParseError(1, "missing HIERARCHY section");
    if (motion_line == 0) throw BvhParseError(lines.size(), "missing MOTION section");

    SkeletonAnimation anim;
    const std::size_t channels = detail::BvhHierarchyReader(std::move(tokens), anim).read();

    std::size_t i = motion_line;  // index of the line after MOTION
    auto next_content = [&]() -> std::size_t {
        while (i < lines.size() && detail::split_ws(lines[i]).empty()) ++i;
        return i;
    };

    next_content();
    if (i >= lines.size()) throw BvhParseError(lines.size(), "missing 'Frames:' line");
    {
        const auto w = detail::split_ws(lines[i]);
        double f = 0;
        if (w.size() != 2 || w[0] != "Frames:" || !detail::parse_double(w[1], f) || f < 0 || f != std::floor(f)) {
            throw BvhParseError(i + 1, "malformed 'Frames:' line");
        }
        anim.frames.resize(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(channels));
        ++i;
    }
    next_content();
    if (i >= lines.size()) throw BvhParseError(lines.size(), "missing 'Frame Time:' line");
    {
        const auto w = detail::split_ws(lines[i]);
        double ft = 0;
        if (w.size() != 3 || w[0] != "Frame" || w[1] != "Time:" || !detail::parse_double(w[2], ft) || !(ft > 0)) {
            throw BvhParseError(i + 1, "malformed 'Frame Time:' line");
        }
        anim.frame_time = ft;
        ++i;
    }

    const auto frame_count = static_cast<std::size_t>(anim.frames.rows());
    std::size_t row = 0;
    for (; i < lines.size(); ++i) {
        const auto w = detail::split_ws(lines[i]);
        if (w.empty()) continue;
        if (row >= frame_count) {
            throw BvhParseError(i + 1, "more frame rows than declared (" + std::to_string(frame_count) + ")");
        }
        if (w.size() != channels) {
            throw BvhParseError(i + 1, "frame row " + std::to_string(row) + " has " + std::to_string(w.size()) +
                                           " values, expected " + std::to_string(channels));
        }
        for (std::size_t c = 0; c < channels; ++c) {
            double v = 0;
            if (!detail::parse_double(w[c], v)) {
                throw BvhParseError(i + 1, "frame row " + std::to_string(row) + ": non-numeric value '" +
                                               std::string(w[c]) + "'");
            }
            anim.frames(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c)) = v;
        }
        ++row;
    }
    if (row != frame_count) {
        throw BvhParseError(lines.size(), "declared " + std::to_string(frame_count) + " frames, found " +
                                              std::to_string(row));
    }
    return anim;
}

inline SkeletonAnimation load_bvh(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open BVH file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_bvh(ss.str());
}

/// Emits a BVH document. Numbers use the shortest round-trip representation,
/// so `parse_bvh(write_bvh(a))` reproduces every value exactly.
inline std::string write_bvh(const SkeletonAnimation& anim) {
    using detail::format_double;
    std::ostringstream out;
    out << "HIERARCHY\n";

    // Children lists in declaration order.
    std::vector<std::vector<std::size_t>> children(anim.joints.size());
    for (std::size_t j = 0; j < anim.joints.size(); ++j) {
        if (anim.joints[j].parent >= 0) children[static_cast<std::size_t>(anim.joints[j].parent)].push_back(j);
    }

    auto emit = [&](auto&& self, std::size_t j, int depth) -> void {
        const BvhJoint& jt = anim.joints[j];
        const std::string ind(static_cast<std::size_t>(depth), '\t');
        if (jt.end_site) {
            out << ind << "End Site\n";
        } else {
            out << ind << (jt.parent < 0 ? "ROOT " : "JOINT ") << jt.name << "\n";
        }
        out << ind << "{\n";
        out << ind << "\tOFFSET " << format_double(jt.offset.x()) << ' ' << format_double(jt.offset.y()) << ' '
            << format_double(jt.offset.z()) << "\n";
        if (!jt.end_site) {
            out << ind << "\tCHANNELS " << jt.channels.size();
            for (Channel c : jt.channels) out << ' ' << to_string(c);
            out << "\n";
        }
        for (std::size_t c : children[j]) self(self, c, depth + 1);
        out << ind << "}\n";
    };
    if (!anim.joints.empty()) emit(emit, 0, 0);

    out << "MOTION\n";
    out << "Frames: " << anim.frames.rows() << "\n";
    out << "Frame Time: " << format_double(anim.frame_time) << "\n";
    for (Eigen::Index r = 0; r < anim.frames.rows(); ++r) {
        for (Eigen::Index c = 0; c < anim.frames.cols(); ++c) {
            if (c) out << ' ';
            out << format_double(anim.frames(r, c));
        }
        out << "\n";
    }
    return out.str();
}

inline void save_bvh(const SkeletonAnimation& anim, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write BVH file '" + path + "'");
    out << write_bvh(anim);
}

}  // namespace sleepose
