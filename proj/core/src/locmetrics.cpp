#include "alnf/locmetrics.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <sstream>

#include "alnf/errors.hpp"
#include "alnf/jsonl.hpp"

namespace alnf::locmetrics {

std::string to_string(EntityClass cls) {
    return cls == EntityClass::person ? "person" : "location";
}

EntityClass entity_class_from_string(const std::string& s) {
    if (s == "person") return EntityClass::person;
    if (s == "location") return EntityClass::location;
    throw ValidationError("unknown entity class: " + s);
}

namespace {

std::string fold(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_ascii_word(unsigned char c) { return std::isalnum(c) != 0; }

bool boundary_before(std::string_view s, std::size_t pos) {
    if (pos == 0) return true;
    const unsigned char c = static_cast<unsigned char>(s[pos - 1]);
    if (c >= 0x80) return false;  // inside a multibyte word
    return !is_ascii_word(c);
}

bool boundary_after(std::string_view s, std::size_t pos) {
    if (pos >= s.size()) return true;
    const unsigned char c = static_cast<unsigned char>(s[pos]);
    if (c >= 0x80) return false;
    return !is_ascii_word(c);
}

}  // namespace

Gazetteer::Gazetteer(std::vector<GazetteerEntry> entries) : entries_(std::move(entries)) {
    for (auto& e : entries_) {
        if (e.surface.empty()) throw ValidationError("empty gazetteer surface form");
    }
    // Disjoint lexicons per class: a surface cannot be both arabic and other.
    std::map<std::pair<std::string, int>, bool> seen;
    for (const auto& e : entries_) {
        const auto key = std::make_pair(fold(e.surface), static_cast<int>(e.cls));
        auto [it, inserted] = seen.emplace(key, e.is_arabic);
        if (!inserted && it->second != e.is_arabic)
            throw ValidationError("gazetteer surface \"" + e.surface +
                                  "\" appears in both arabic and other lexicons");
    }
    std::stable_sort(entries_.begin(), entries_.end(),
                     [](const GazetteerEntry& a, const GazetteerEntry& b) {
                         return a.surface.size() > b.surface.size();
                     });
    folded_.reserve(entries_.size());
    for (const auto& e : entries_) folded_.push_back(fold(e.surface));
}

Gazetteer Gazetteer::from_file(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    std::vector<GazetteerEntry> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::size_t t1 = line.find('\t');
        const std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos)
            throw ParseError(path.string(), lineno, "expected surface<TAB>class<TAB>arabic|other");
        GazetteerEntry e;
        e.surface = line.substr(0, t1);
        e.cls = entity_class_from_string(line.substr(t1 + 1, t2 - t1 - 1));
        const std::string origin = line.substr(t2 + 1);
        if (origin == "arabic") e.is_arabic = true;
        else if (origin == "other") e.is_arabic = false;
        else throw ParseError(path.string(), lineno, "origin must be arabic or other: " + origin);
        entries.push_back(std::move(e));
    }
    return Gazetteer(std::move(entries));
}

std::vector<Entity> Gazetteer::recognize(std::string_view text) const {
    std::vector<Entity> found;
    const std::string folded = fold(text);
    std::size_t pos = 0;
    while (pos < folded.size()) {
        const GazetteerEntry* hit = nullptr;
        for (std::size_t k = 0; k < entries_.size(); ++k) {  // longest-first order
            const auto& e = entries_[k];
            if (e.surface.size() > folded.size() - pos) continue;
            if (folded.compare(pos, e.surface.size(), folded_[k]) != 0) continue;
            if (!boundary_before(folded, pos) || !boundary_after(folded, pos + e.surface.size()))
                continue;
            hit = &e;
            break;
        }
        if (hit) {
            Entity entity;
            entity.surface = std::string(text.substr(pos, hit->surface.size()));
            entity.cls = hit->cls;
            entity.is_arabic = hit->is_arabic;
            entity.byte_offset = pos;
            found.push_back(std::move(entity));
            pos += hit->surface.size();
        } else {
            ++pos;
        }
    }
    return found;
}

ProportionResult entity_proportion(std::span<const std::string> responses,
                                   const EntityRecognizer& recognizer, EntityClass cls) {
    std::size_t arabic = 0, total = 0;
    for (const auto& response : responses) {
        for (const Entity& e : recognizer.recognize(response)) {
            if (e.cls != cls) continue;
            ++total;
            if (e.is_arabic) ++arabic;
        }
    }
    return proportion_from_counts(arabic, total);
}

ProportionResult proportion_from_counts(std::size_t arabic_count, std::size_t total_count) {
    ProportionResult result;
    result.arabic_count = arabic_count;
    result.total_count = total_count;
    if (total_count == 0) {
        result.rendered = "undefined";
        return result;
    }
    result.percent =
        100.0 * static_cast<double>(arabic_count) / static_cast<double>(total_count);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", *result.percent);
    result.rendered = buf;
    return result;
}

}  // namespace alnf::locmetrics
