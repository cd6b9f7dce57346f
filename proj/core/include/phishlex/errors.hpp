#pragma once

#include <stdexcept>
#include <string>

namespace phishlex {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// url_model
class EmptyHostError final : public Error { public: using Error::Error; };
class MalformedHostError final : public Error { public: using Error::Error; };

// file ingestion
class IoError final : public Error { public: using Error::Error; };
class FormatError final : public Error { public: using Error::Error; };
class EmptyDatasetError final : public Error { public: using Error::Error; };
class TooFewExamplesError final : public Error { public: using Error::Error; };

// classifiers
class EmptyNodeError final : public Error { public: using Error::Error; };
class DimensionMismatchError final : public Error { public: using Error::Error; };

// evaluation
class LengthMismatchError final : public Error { public: using Error::Error; };
class EmptyInputError final : public Error { public: using Error::Error; };

// model files
class SchemaError final : public Error { public: using Error::Error; };
class CorruptPayloadError final : public Error { public: using Error::Error; };

// pdns logs
class FieldCountError final : public Error { public: using Error::Error; };
class NumericFieldError final : public Error { public: using Error::Error; };

} // namespace phishlex
