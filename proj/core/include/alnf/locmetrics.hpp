#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace alnf::locmetrics {

enum class EntityClass { person, location };

std::string to_string(EntityClass cls);
EntityClass entity_class_from_string(const std::string& s);

struct Entity {
    std::string surface;
    EntityClass cls = EntityClass::person;
    bool is_arabic = false;
    std::size_t byte_offset = 0;
};

/// Behavioral contract: pull (surface, class, is_arabic) mentions out of text.
class EntityRecognizer {
public:
    virtual ~EntityRecognizer() = default;
    virtual std::vector<Entity> recognize(std::string_view text) const = 0;
};

struct GazetteerEntry {
    std::string surface;
    EntityClass cls = EntityClass::person;
    bool is_arabic = false;
};

/// Lexicon matcher: deterministic, longest match wins, overlaps resolved
/// left to right, matches only at word boundaries.
class Gazetteer : public EntityRecognizer {
public:
    explicit Gazetteer(std::vector<GazetteerEntry> entries);

    /// One entry per line: surface<TAB>class<TAB>arabic|other. '#' comments.
    static Gazetteer from_file(const std::filesystem::path& path);

    std::vector<Entity> recognize(std::string_view text) const override;

    std::size_t size() const { return entries_.size(); }

private:
    std::vector<GazetteerEntry> entries_;  // sorted longest-surface-first
    std::vector<std::string> folded_;      // case-folded surfaces, same order
};

struct ProportionResult {
    std::size_t arabic_count = 0;
    std::size_t total_count = 0;
    std::optional<double> percent;  // empty when total == 0
    std::string rendered;           // "12.00%" or "undefined"
};

/// Counts entities of one class over all responses and reports the Arabic
/// fraction, rendered to two decimals.
ProportionResult entity_proportion(std::span<const std::string> responses,
                                   const EntityRecognizer& recognizer, EntityClass cls);

/// Same arithmetic with the counts injected directly.
ProportionResult proportion_from_counts(std::size_t arabic_count, std::size_t total_count);

}  // namespace alnf::locmetrics
