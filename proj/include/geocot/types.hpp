#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "geocot/error.hpp"

namespace geocot {

enum class TaskKind {
    VQA,
    SceneClassification,
    VisualGrounding,
    ObjectCounting,
    ObjectDetection,
    ImageCaptioning,
};

inline constexpr std::array<TaskKind, 6> kAllTasks = {
    TaskKind::VQA,           TaskKind::SceneClassification, TaskKind::VisualGrounding,
    TaskKind::ObjectCounting, TaskKind::ObjectDetection,    TaskKind::ImageCaptioning,
};

// Canonical snake_case name used in JSON files and on the command line.
inline std::string_view task_name(TaskKind t) {
    switch (t) {
    case TaskKind::VQA: return "vqa";
    case TaskKind::SceneClassification: return "scene_classification";
    case TaskKind::VisualGrounding: return "visual_grounding";
    case TaskKind::ObjectCounting: return "object_counting";
    case TaskKind::ObjectDetection: return "object_detection";
    case TaskKind::ImageCaptioning: return "image_captioning";
    }
    return "unknown";
}

inline std::optional<TaskKind> parse_task(std::string_view s) {
    for (TaskKind t : kAllTasks)
        if (task_name(t) == s) return t;
    if (s == "classification") return TaskKind::SceneClassification;
    if (s == "grounding") return TaskKind::VisualGrounding;
    if (s == "counting") return TaskKind::ObjectCounting;
    if (s == "detection") return TaskKind::ObjectDetection;
    if (s == "captioning") return TaskKind::ImageCaptioning;
    return std::nullopt;
}

inline TaskKind task_from_string(std::string_view s) {
    auto t = parse_task(s);
    if (!t) throw Error(Errc::UnknownTask, "unknown task '" + std::string(s) + "'");
    return *t;
}

// Axis-aligned box in fractions of image width/height.
struct BBox {
    double x_min = 0, y_min = 0, x_max = 0, y_max = 0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }

    bool valid() const {
        return 0.0 <= x_min && x_min <= x_max && x_max <= 1.0 && 0.0 <= y_min &&
               y_min <= y_max && y_max <= 1.0;
    }

    friend bool operator==(const BBox&, const BBox&) = default;
};

struct Count {
    std::uint64_t value = 0;
    friend bool operator==(const Count&, const Count&) = default;
};
struct Boxes {
    std::vector<BBox> boxes;
    friend bool operator==(const Boxes&, const Boxes&) = default;
};
struct Label {
    std::string text;
    friend bool operator==(const Label&, const Label&) = default;
};
struct Caption {
    std::string text;
    friend bool operator==(const Caption&, const Caption&) = default;
};
struct FreeText {
    std::string text;
    friend bool operator==(const FreeText&, const FreeText&) = default;
};

using ParsedAnswer = std::variant<Count, Boxes, Label, Caption, FreeText>;

// A box with its emission rank (1 = first emitted) and class label.
struct Detection {
    BBox box;
    int rank = 1;
    std::string label;
};

} // namespace geocot
