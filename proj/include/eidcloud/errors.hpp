#pragma once

#include <stdexcept>
#include <string>

namespace eidcloud {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define EIDCLOUD_ERROR(Name)                \
    class Name : public Error {             \
    public:                                 \
        using Error::Error;                 \
    }

EIDCLOUD_ERROR(DecodeError);
EIDCLOUD_ERROR(KeyError);
/// The failure symbol of decryption: wrong key, wrong identity or tampered bytes.
EIDCLOUD_ERROR(DecryptionError);
EIDCLOUD_ERROR(SigningError);
EIDCLOUD_ERROR(RedactionError);
EIDCLOUD_ERROR(DepthError);
EIDCLOUD_ERROR(RoutingError);
EIDCLOUD_ERROR(ParameterError);
EIDCLOUD_ERROR(IssuanceError);
EIDCLOUD_ERROR(RegistrationError);
EIDCLOUD_ERROR(LookupError);
EIDCLOUD_ERROR(SetupError);
EIDCLOUD_ERROR(ScenarioError);
EIDCLOUD_ERROR(AuditError);
EIDCLOUD_ERROR(RenderError);
/// Privacy claims requested on the test-double backend.
EIDCLOUD_ERROR(AuditRefused);
EIDCLOUD_ERROR(KeyStoreError);

#undef EIDCLOUD_ERROR

}  // namespace eidcloud
