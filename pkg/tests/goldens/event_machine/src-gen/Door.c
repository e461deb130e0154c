#include "Door.h"

#define DOOR_MICROSTEP_LIMIT 1000

#define DOOR_EVENT_NONE (-1)
#define DOOR_EVENT_push 0

static sc_bool door_step(Door* handle, int event) {
    (void) event;
    switch (handle->active) {
    case door_main_region_Closed:
        if (event == DOOR_EVENT_push && (handle->locked == sc_false)) {
            handle->active = door_main_region_Open;
            return sc_true;
        }
        return sc_false;
    case door_main_region_Open:
        if (event == DOOR_EVENT_push) {
            handle->active = door_main_region_Closed;
            return sc_true;
        }
        if (event == DOOR_EVENT_NONE && (handle->locked == sc_true)) {
            handle->active = door_main_region__final_;
            return sc_true;
        }
        return sc_false;
    default:
        return sc_false;
    }
}

static void door_rtc(Door* handle, int event) {
    int steps = 0;
    while (steps < DOOR_MICROSTEP_LIMIT && handle->active != door_main_region__final_) {
        if (!door_step(handle, event)) {
            if (event == DOOR_EVENT_NONE) {
                break;
            }
            event = DOOR_EVENT_NONE;
            continue;
        }
        event = DOOR_EVENT_NONE;
        ++steps;
    }
}

void door_init(Door* handle) {
    handle->active = door_main_region_Closed;
    handle->locked = sc_false;
}

void door_enter(Door* handle) {
    door_init(handle);
    door_rtc(handle, DOOR_EVENT_NONE);
}

sc_bool door_isActive(const Door* handle, DoorStates state) {
    return handle->active == state;
}

void doorIfaceDoor_set_locked(Door* handle, sc_bool value) {
    if (handle->active == door_main_region__final_) {
        return;
    }
    handle->locked = value;
    door_rtc(handle, DOOR_EVENT_NONE);
}

void doorIfaceDoor_raise_push(Door* handle) {
    if (handle->active == door_main_region__final_) {
        return;
    }
    door_rtc(handle, DOOR_EVENT_push);
}
