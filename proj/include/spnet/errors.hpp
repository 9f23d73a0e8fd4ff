#pragma once

#include <stdexcept>
#include <string>

namespace spnet {

/// Base class for all spnet failures.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mesh parsing and validation.
struct MalformedHeader : Error { using Error::Error; };
struct MalformedFace : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct EmptyMesh : Error { using Error::Error; };
struct DegenerateMesh : Error { using Error::Error; };

// Projection domain.
struct NotUnit : Error { using Error::Error; };
struct OutOfRegion : Error { using Error::Error; };

// Tensor kernels.
struct ShapeMismatch : Error { using Error::Error; };
struct OddSpatialDim : Error { using Error::Error; };

// Multi-view aggregation.
struct EmptyViews : Error { using Error::Error; };

// Pipeline orchestration.
struct StageDependency : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace spnet
