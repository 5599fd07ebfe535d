#pragma once

// Every translation unit that uses httplib includes it through this header so
// the TLS switch is identical everywhere.
#ifdef VULTRIAGE_WITH_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
