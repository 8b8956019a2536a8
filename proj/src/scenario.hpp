#ifndef GRADHARM_SCENARIO_HPP
#define GRADHARM_SCENARIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "matrix.hpp"

namespace gradharm {

struct DatasetMeta {
  std::size_t num_classes = 0;
  std::size_t input_dim = 0;
  std::string shift_kind;  // "blobs", "csv", ...
  std::uint64_t seed = 0;

  bool operator==(const DatasetMeta&) const = default;
};

// Synthetic or loaded domain-shift dataset. Target labels are held out for
// evaluation only; training consumes batches without them. A target label of
// -1 marks an unlabeled row (excluded from evaluation).
struct Dataset {
  Matrix source_x;
  std::vector<int> source_y;
  Matrix target_x;
  std::vector<int> target_y;
  DatasetMeta meta;

  bool operator==(const Dataset&) const = default;
};

struct BlobsSpec {
  std::uint64_t seed = 1;
  std::size_t num_classes = 2;
  std::size_t per_class = 200;
  std::size_t input_dim = 2;
  double rotation = 0.0;                // radians, about the origin
  std::vector<double> translation;      // defaults to all-zero
  double noise_sigma = 1.2;
  double phase = 0.7853981633974483;    // angular offset of the class centers
};

// Gaussian class blobs on a circle of radius 3; the target domain redraws the
// same blobs, rotates them in the first two coordinates and translates them.
// Bit-exactly reproducible from the seed.
Dataset make_blobs(const BlobsSpec& spec);

// CSV with header "domain,label,f0,f1,..."; domain is source|target, label an
// integer (-1 allowed for unlabeled target rows). Row order is preserved.
Dataset load_csv(const std::string& path);

// Inverse of load_csv; numbers are written with shortest round-trip
// formatting so a write/read cycle is value-identical.
void save_csv(const Dataset& ds, const std::string& path);

}  // namespace gradharm

#endif
