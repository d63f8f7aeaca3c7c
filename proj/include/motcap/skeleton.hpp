#pragma once

#include <array>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "motcap/tensor.hpp"

namespace motcap {

// Canonical part order; spatial-attention vectors index parts this way.
enum class BodyPart : int { LeftArm = 0, RightArm = 1, Torso = 2, LeftLeg = 3, RightLeg = 4, Root = 5 };
inline constexpr int kNumParts = 6;

inline const std::array<std::string, kNumParts>& part_names() {
    static const std::array<std::string, kNumParts> names = {"LeftArm", "RightArm", "Torso",
                                                             "LeftLeg", "RightLeg", "Root"};
    return names;
}

inline BodyPart part_from_name(const std::string& name) {
    const auto& names = part_names();
    for (int i = 0; i < kNumParts; ++i) {
        if (names[i] == name) return static_cast<BodyPart>(i);
    }
    throw std::invalid_argument("unknown body part: " + name);
}

struct SkeletonLayout {
    std::vector<std::string> joint_names;
    std::vector<BodyPart> part_map;  // joint index -> part
    int root_joint = -1;

    int num_joints() const { return static_cast<int>(joint_names.size()); }

    // Joint indices of one part, ascending; this order fixes the flattened
    // feature layout of gather_parts.
    std::vector<int> joints_of(BodyPart part) const {
        std::vector<int> out;
        for (int j = 0; j < num_joints(); ++j) {
            if (part_map[j] == part) out.push_back(j);
        }
        return out;
    }

    void validate() const {
        if (joint_names.empty()) throw std::invalid_argument("skeleton layout: no joints");
        if (part_map.size() != joint_names.size()) {
            throw std::invalid_argument("skeleton layout: part_map/joint count mismatch");
        }
        if (root_joint < 0 || root_joint >= num_joints()) {
            throw std::invalid_argument("skeleton layout: missing root joint");
        }
        if (part_map[root_joint] != BodyPart::Root) {
            throw std::invalid_argument("skeleton layout: root joint not assigned to Root part");
        }
        auto root = joints_of(BodyPart::Root);
        if (root.size() != 1) {
            throw std::invalid_argument("skeleton layout: Root part must contain exactly the root joint");
        }
    }
};

// Positions and velocities are T_x x (J*D) row-major: frame k, joint j,
// dimension d at column j*D + d. Units are meters and meters/frame.
struct MotionSequence {
    Tensor positions;
    Tensor velocities;
    SkeletonLayout layout;
    double frame_rate = 0.0;
    int dims = 3;

    int num_frames() const { return positions.rows(); }

    double pos(int frame, int joint, int d) const { return positions(frame, joint * dims + d); }
    double& pos(int frame, int joint, int d) { return positions(frame, joint * dims + d); }
    double vel(int frame, int joint, int d) const { return velocities(frame, joint * dims + d); }
};

// Non-root joints become offsets from the same-frame root position; the root
// keeps its global trajectory.
inline MotionSequence to_root_relative(const MotionSequence& seq) {
    seq.layout.validate();
    MotionSequence out = seq;
    const int root = seq.layout.root_joint;
    for (int k = 0; k < seq.num_frames(); ++k) {
        for (int j = 0; j < seq.layout.num_joints(); ++j) {
            if (j == root) continue;
            for (int d = 0; d < seq.dims; ++d) out.pos(k, j, d) = seq.pos(k, j, d) - seq.pos(k, root, d);
        }
    }
    return out;
}

// V_k = X_k - X_{k-1}, V_0 = 0.
inline MotionSequence compute_velocities(const MotionSequence& seq) {
    if (seq.num_frames() < 2) {
        throw std::invalid_argument("compute_velocities: need at least 2 frames, got " +
                                    std::to_string(seq.num_frames()));
    }
    MotionSequence out = seq;
    out.velocities = Tensor(seq.positions.rows(), seq.positions.cols(), 0.0);
    for (int k = 1; k < seq.num_frames(); ++k) {
        for (int c = 0; c < seq.positions.cols(); ++c) {
            out.velocities(k, c) = seq.positions(k, c) - seq.positions(k - 1, c);
        }
    }
    return out;
}

struct PartArrays {
    // One T_x x (|part|*D) array per part for each stream, part-canonical order.
    std::array<Tensor, kNumParts> positions;
    std::array<Tensor, kNumParts> velocities;
};

inline PartArrays gather_parts(const MotionSequence& seq) {
    seq.layout.validate();
    if (seq.velocities.empty()) {
        throw std::invalid_argument("gather_parts: velocities not computed");
    }
    PartArrays out;
    const int T = seq.num_frames();
    for (int p = 0; p < kNumParts; ++p) {
        const auto joints = seq.layout.joints_of(static_cast<BodyPart>(p));
        Tensor xs(T, static_cast<int>(joints.size()) * seq.dims);
        Tensor vs(T, static_cast<int>(joints.size()) * seq.dims);
        for (int k = 0; k < T; ++k) {
            int col = 0;
            for (int j : joints) {
                for (int d = 0; d < seq.dims; ++d, ++col) {
                    xs(k, col) = seq.pos(k, j, d);
                    vs(k, col) = seq.vel(k, j, d);
                }
            }
        }
        out.positions[p] = std::move(xs);
        out.velocities[p] = std::move(vs);
    }
    return out;
}

// Default test skeleton: 13 joints, 2 per limb part, 4 torso, 1 root, D = 3.
inline SkeletonLayout default_layout() {
    SkeletonLayout layout;
    auto add = [&](const std::string& name, BodyPart part) {
        layout.joint_names.push_back(name);
        layout.part_map.push_back(part);
    };
    add("root", BodyPart::Root);
    layout.root_joint = 0;
    add("spine", BodyPart::Torso);
    add("chest", BodyPart::Torso);
    add("neck", BodyPart::Torso);
    add("head", BodyPart::Torso);
    add("l_elbow", BodyPart::LeftArm);
    add("l_hand", BodyPart::LeftArm);
    add("r_elbow", BodyPart::RightArm);
    add("r_hand", BodyPart::RightArm);
    add("l_knee", BodyPart::LeftLeg);
    add("l_foot", BodyPart::LeftLeg);
    add("r_knee", BodyPart::RightLeg);
    add("r_foot", BodyPart::RightLeg);
    layout.validate();
    return layout;
}

// ---------------------------------------------------------------------------
// motion file format:
// {"layout": {"joints": [{"name":.., "part":..}...], "root": idx},
//  "frame_rate": f, "frames": [[x,y,z per joint] ...]}
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json layout_to_json(const SkeletonLayout& layout) {
    nlohmann::ordered_json joints = nlohmann::ordered_json::array();
    for (int j = 0; j < layout.num_joints(); ++j) {
        joints.push_back({{"name", layout.joint_names[j]},
                          {"part", part_names()[static_cast<int>(layout.part_map[j])]}});
    }
    return {{"joints", joints}, {"root", layout.root_joint}};
}

inline SkeletonLayout layout_from_json(const nlohmann::json& j) {
    SkeletonLayout layout;
    for (const auto& joint : j.at("joints")) {
        layout.joint_names.push_back(joint.at("name").get<std::string>());
        layout.part_map.push_back(part_from_name(joint.at("part").get<std::string>()));
    }
    layout.root_joint = j.at("root").get<int>();
    layout.validate();
    return layout;
}

inline nlohmann::ordered_json motion_to_json(const MotionSequence& seq) {
    nlohmann::ordered_json j;
    j["layout"] = layout_to_json(seq.layout);
    j["frame_rate"] = seq.frame_rate;
    nlohmann::ordered_json frames = nlohmann::ordered_json::array();
    for (int k = 0; k < seq.num_frames(); ++k) {
        nlohmann::ordered_json frame = nlohmann::ordered_json::array();
        for (int c = 0; c < seq.positions.cols(); ++c) frame.push_back(seq.positions(k, c));
        frames.push_back(std::move(frame));
    }
    j["frames"] = std::move(frames);
    return j;
}

inline MotionSequence motion_from_json(const nlohmann::json& j) {
    MotionSequence seq;
    seq.layout = layout_from_json(j.at("layout"));
    seq.frame_rate = j.at("frame_rate").get<double>();
    const auto& frames = j.at("frames");
    if (frames.size() < 2) throw std::invalid_argument("motion file: need at least 2 frames");
    const int T = static_cast<int>(frames.size());
    const int width = seq.layout.num_joints() * seq.dims;
    seq.positions = Tensor(T, width);
    for (int k = 0; k < T; ++k) {
        const auto& frame = frames[k];
        if (static_cast<int>(frame.size()) != width) {
            throw std::invalid_argument("motion file: frame " + std::to_string(k) + " has " +
                                        std::to_string(frame.size()) + " values, expected " +
                                        std::to_string(width));
        }
        for (int c = 0; c < width; ++c) seq.positions(k, c) = frame[c].get<double>();
    }
    if (!seq.positions.all_finite()) throw std::invalid_argument("motion file: non-finite position");
    return seq;
}

inline void save_motion(const MotionSequence& seq, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << motion_to_json(seq).dump();
}

inline MotionSequence load_motion(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    nlohmann::json j;
    in >> j;
    return motion_from_json(j);
}

}  // namespace motcap
