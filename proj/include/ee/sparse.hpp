#pragma once

#include <map>
#include <string>

namespace ee {

// Sparse feature vector keyed by namespaced feature id ("writeup:overflow",
// "code:python:cyclomatic", ...). Zero-valued entries are never stored; the
// sorted map keeps serialization and iteration order stable.
class SparseVector {
public:
    using Map = std::map<std::string, double>;

    void set(const std::string& id, double value) {
        if (value == 0.0) {
            entries_.erase(id);
        } else {
            entries_[id] = value;
        }
    }

    // Binary OR: sets the feature to 1 regardless of prior value.
    void set_flag(const std::string& id) { entries_[id] = 1.0; }

    double get(const std::string& id) const {
        auto it = entries_.find(id);
        return it == entries_.end() ? 0.0 : it->second;
    }

    bool has(const std::string& id) const { return entries_.count(id) > 0; }

    // Merges `other` into this vector. Binary features OR together;
    // numeric collisions keep the latest value written.
    void merge(const SparseVector& other) {
        for (const auto& [id, v] : other.entries_) entries_[id] = v;
    }

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    Map::const_iterator begin() const { return entries_.begin(); }
    Map::const_iterator end() const { return entries_.end(); }

    const Map& entries() const { return entries_; }

private:
    Map entries_;
};

}  // namespace ee
