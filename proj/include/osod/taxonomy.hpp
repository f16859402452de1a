#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "osod/common.hpp"

namespace osod {

// Category bookkeeping over K known classes plus two synthetic slots.
//
// Slots are 0-based: [0, K) are the known classes in declaration order,
// K is the merged unknown class and K+1 is background. Dataset category
// ids listed in unknown_source_ids are collapsed onto the unknown slot
// at evaluation time; on the wire a single configurable category id
// stands in for the unknown class.
class CategorySpace {
 public:
  CategorySpace(std::vector<int> known_ids, std::set<int> unknown_source_ids,
                std::optional<int> unknown_wire_id = std::nullopt)
      : known_ids_(std::move(known_ids)),
        unknown_source_ids_(std::move(unknown_source_ids)) {
    if (known_ids_.empty()) {
      throw validation_error("category space needs at least one known class");
    }
    for (std::size_t i = 0; i < known_ids_.size(); ++i) {
      if (!slot_of_.emplace(known_ids_[i], i).second) {
        throw validation_error("duplicate known category id " +
                               std::to_string(known_ids_[i]));
      }
    }
    for (int id : unknown_source_ids_) {
      if (slot_of_.count(id)) {
        throw validation_error("category id " + std::to_string(id) +
                               " is both known and unknown-source");
      }
    }
    if (unknown_wire_id) {
      unknown_wire_id_ = *unknown_wire_id;
    } else {
      unknown_wire_id_ = 1 + *std::max_element(known_ids_.begin(), known_ids_.end());
    }
    if (slot_of_.count(unknown_wire_id_)) {
      throw validation_error("unknown wire id collides with a known category id");
    }
  }

  std::size_t num_known() const { return known_ids_.size(); }
  std::size_t unknown_slot() const { return num_known(); }
  std::size_t background_slot() const { return num_known() + 1; }
  // Size of a full label vector: K known + unknown + background.
  std::size_t num_slots() const { return num_known() + 2; }

  const std::vector<int>& known_ids() const { return known_ids_; }
  const std::set<int>& unknown_source_ids() const { return unknown_source_ids_; }
  int unknown_wire_id() const { return unknown_wire_id_; }

  bool is_known(int category_id) const { return slot_of_.count(category_id) > 0; }
  bool is_unknown_source(int category_id) const {
    return unknown_source_ids_.count(category_id) > 0;
  }

  std::size_t slot_of(int category_id) const {
    auto it = slot_of_.find(category_id);
    if (it != slot_of_.end()) return it->second;
    if (is_unknown_source(category_id) || category_id == unknown_wire_id_) {
      return unknown_slot();
    }
    throw validation_error("category id " + std::to_string(category_id) +
                           " is neither known nor unknown-source");
  }

  // Wire id for a slot; the unknown slot maps to unknown_wire_id.
  int category_of_slot(std::size_t slot) const {
    if (slot < num_known()) return known_ids_[slot];
    if (slot == unknown_slot()) return unknown_wire_id_;
    throw validation_error("slot " + std::to_string(slot) +
                           " has no wire category (background is never emitted)");
  }

 private:
  std::vector<int> known_ids_;
  std::set<int> unknown_source_ids_;
  std::unordered_map<int, std::size_t> slot_of_;
  int unknown_wire_id_ = 0;
};

}  // namespace osod
