#ifndef SM_H_
#define SM_H_

#include "sc_types.h"

typedef enum {
    sm_main_region_State1,
    sm_main_region_State2,
    sm_main_region_State3,
    sm_main_region__final_
} SmStates;

typedef struct {
    SmStates active;
    sc_int32 value1;
    sc_int32 value2;
    sc_bool value3;
} Sm;

void sm_init(Sm* handle);
void sm_enter(Sm* handle);
sc_bool sm_isActive(const Sm* handle, SmStates state);
void smIfaceSm_set_value1(Sm* handle, sc_int32 value);
void smIfaceSm_set_value2(Sm* handle, sc_int32 value);
void smIfaceSm_set_value3(Sm* handle, sc_bool value);

#endif /* SM_H_ */
