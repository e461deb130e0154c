#ifndef SC_TYPES_H_
#define SC_TYPES_H_

#include <stdint.h>
#include <stdbool.h>

typedef int32_t sc_int32;
typedef bool sc_bool;

#define sc_true true
#define sc_false false

#endif /* SC_TYPES_H_ */
