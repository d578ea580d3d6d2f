// Copyright 2026 The qsub Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QSUB_ERRORS_HPP
#define QSUB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qsub {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
   public:
    using Error::Error;
};

class PlacementInfeasible : public Error {
   public:
    using Error::Error;
};

class GridTooLarge : public Error {
   public:
    using Error::Error;
};

class GridMismatch : public Error {
   public:
    using Error::Error;
};

class ZeroChannel : public Error {
   public:
    using Error::Error;
};

class NotUnitary : public Error {
   public:
    using Error::Error;
};

class RegisterTooLarge : public Error {
   public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
   public:
    using Error::Error;
};

class CombinationExplosion : public Error {
   public:
    using Error::Error;
};

class ObjectiveNonFinite : public Error {
   public:
    using Error::Error;
};

class Overflow : public Error {
   public:
    using Error::Error;
};

class EmptyGroup : public Error {
   public:
    using Error::Error;
};

class ConfigError : public Error {
   public:
    using Error::Error;
};

}  // namespace qsub

#endif
