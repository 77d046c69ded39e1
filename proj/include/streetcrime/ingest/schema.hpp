#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include "streetcrime/core/error.hpp"
#include "streetcrime/core/numfmt.hpp"

namespace streetcrime::ingest {

// Ordered list of segmentation class labels. The order fixes feature columns
// everywhere downstream.
struct ClassSchema {
    std::string name;
    std::vector<std::string> classes;
    // Human-readable names for report tables; empty means use `classes`.
    std::vector<std::string> display_names;

    std::size_t size() const noexcept { return classes.size(); }

    const std::string& display_name(std::size_t i) const {
        return display_names.size() == classes.size() ? display_names[i] : classes[i];
    }

    void validate() const {
        if (classes.empty()) throw ValidationError("schema '" + name + "' has no classes");
        std::unordered_set<std::string> seen;
        for (const auto& c : classes) {
            if (c.empty()) throw ValidationError("schema '" + name + "' has an empty label");
            if (!seen.insert(c).second) throw ValidationError("schema '" + name + "' repeats label '" + c + "'");
        }
        if (!display_names.empty() && display_names.size() != classes.size())
            throw ValidationError("schema '" + name + "' display names do not match class count");
    }
};

// The 21-label Pascal VOC list: background plus 20 object classes.
inline ClassSchema voc21() {
    return {"voc21",
            {"background", "aeroplane", "bicycle", "bird", "boat", "bottle", "bus", "car", "cat", "chair", "cow",
             "diningtable", "dog", "horse", "motorbike", "person", "pottedplant", "sheep", "sofa", "train",
             "tvmonitor"},
            {"Background", "Aeroplane", "Bicycle", "Bird", "Boat", "Bottle", "Bus", "Car", "Cat", "Chair", "Cow",
             "Dining table", "Dog", "Horse", "Motorbike", "Person", "Potted plant", "Sheep", "Sofa", "Train",
             "TV/Monitor"}};
}

// Schema file: first line "# schema <name>", then one label per line.
inline void write_schema(std::ostream& out, const ClassSchema& schema) {
    out << "# schema " << schema.name << '\n';
    for (const auto& c : schema.classes) out << c << '\n';
}

inline ClassSchema read_schema(std::istream& in) {
    ClassSchema schema;
    std::string line;
    while (std::getline(in, line)) {
        const auto t = std::string(trim(line));
        if (t.empty()) continue;
        if (t.rfind("# schema ", 0) == 0) {
            schema.name = t.substr(9);
            continue;
        }
        if (t.front() == '#') continue;
        schema.classes.push_back(t);
    }
    if (schema.name == "voc21" && schema.classes == voc21().classes) schema.display_names = voc21().display_names;
    schema.validate();
    return schema;
}

} // namespace streetcrime::ingest
