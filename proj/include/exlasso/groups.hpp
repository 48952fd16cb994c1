#ifndef EXLASSO_GROUPS_HPP
#define EXLASSO_GROUPS_HPP

#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "exlasso/types.hpp"

namespace exlasso {

//! A disjoint partition of coordinates {0, ..., n-1} into groups, together
//! with a vector of strictly positive per-coordinate weights.
//!
//! Groups need not be contiguous and may have size one, but every coordinate
//! must belong to exactly one group. The partition is immutable after
//! construction.
class GroupPartition {
 public:
  //! Construct from explicit (0-based) index lists and weights.
  //! Throws `std::invalid_argument` if the lists do not form a partition of
  //! {0, ..., weights.size()-1}, or if any weight is not strictly positive.
  GroupPartition(std::vector<std::vector<Index>> groups, Vector weights)
      : groups_(std::move(groups)),
        weights_(std::move(weights)),
        group_of_(static_cast<std::size_t>(weights_.size()), -1) {
    const Index n = weights_.size();
    if (n <= 0) {
      throw std::invalid_argument("GroupPartition: dimension must be positive");
    }
    for (Index i = 0; i < n; ++i) {
      if (!(weights_[i] > 0.0)) {
        throw std::invalid_argument("GroupPartition: weights must be strictly positive");
      }
    }
    Index covered = 0;
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      if (groups_[g].empty()) {
        throw std::invalid_argument("GroupPartition: empty group");
      }
      for (Index i : groups_[g]) {
        if (i < 0 || i >= n) {
          throw std::invalid_argument("GroupPartition: index out of range");
        }
        if (group_of_[static_cast<std::size_t>(i)] != -1) {
          throw std::invalid_argument("GroupPartition: groups overlap");
        }
        group_of_[static_cast<std::size_t>(i)] = static_cast<Index>(g);
        ++covered;
      }
    }
    if (covered != n) {
      throw std::invalid_argument("GroupPartition: groups do not cover all coordinates");
    }
  }

  //! `n_groups` contiguous blocks of `group_size` coordinates each, unit weights.
  static GroupPartition contiguous(Index n_groups, Index group_size) {
    if (n_groups <= 0 || group_size <= 0) {
      throw std::invalid_argument("GroupPartition::contiguous: sizes must be positive");
    }
    std::vector<std::vector<Index>> groups(static_cast<std::size_t>(n_groups));
    for (Index g = 0; g < n_groups; ++g) {
      auto& idx = groups[static_cast<std::size_t>(g)];
      idx.resize(static_cast<std::size_t>(group_size));
      std::iota(idx.begin(), idx.end(), g * group_size);
    }
    return GroupPartition(std::move(groups), Vector::Ones(n_groups * group_size));
  }

  //! All of {0, ..., n-1} as a single group with unit weights.
  static GroupPartition single(Index n) {
    std::vector<std::vector<Index>> groups(1);
    groups[0].resize(static_cast<std::size_t>(n));
    std::iota(groups[0].begin(), groups[0].end(), Index{0});
    return GroupPartition(std::move(groups), Vector::Ones(n));
  }

  Index dim() const { return weights_.size(); }
  Index group_count() const { return static_cast<Index>(groups_.size()); }
  const std::vector<Index>& group(Index g) const { return groups_[static_cast<std::size_t>(g)]; }
  const std::vector<std::vector<Index>>& groups() const { return groups_; }
  const Vector& weights() const { return weights_; }
  Index group_of(Index i) const { return group_of_[static_cast<std::size_t>(i)]; }

 private:
  std::vector<std::vector<Index>> groups_;
  Vector weights_;
  std::vector<Index> group_of_;
};

}  // namespace exlasso

#endif  // EXLASSO_GROUPS_HPP
