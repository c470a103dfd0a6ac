#pragma once

#include <stdexcept>
#include <string>

namespace planrec {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// corpus
struct EmptyLibraryError : Error { using Error::Error; };
struct IllegalTokenError : Error { using Error::Error; };
struct BlockTooLongError : Error { using Error::Error; };
struct TooFewPlansError : Error { using Error::Error; };

// embeddings
struct VocabularyTooSmallError : Error { using Error::Error; };
struct UnknownTokenError : Error { using Error::Error; };
struct ZeroVectorError : Error { using Error::Error; };

// dup
struct NoUnobservedSlotsError : Error { using Error::Error; };
struct IndexOutOfPlanError : Error { using Error::Error; };
struct ZeroWeightError : Error { using Error::Error; };

// rnn
struct DimensionMismatchError : Error { using Error::Error; };
struct LeadingUnobservedError : Error { using Error::Error; };

// blocks
struct BadBlockCountError : Error { using Error::Error; };
struct MismatchedBlocksError : Error { using Error::Error; };
struct InvalidPlanError : Error { using Error::Error; };

// harness
struct EmptyTestSetError : Error { using Error::Error; };
struct EmptyRecordsError : Error { using Error::Error; };

// io
struct FileFormatError : Error { using Error::Error; };

}  // namespace planrec
