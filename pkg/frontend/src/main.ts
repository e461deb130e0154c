import { ApiClient } from "./api.js";
import { Controller } from "./controller.js";
import { DomView, wire } from "./dom.js";

const root = document.querySelector<HTMLElement>(".app")!;
const view = new DomView(root);
const controller = new Controller(new ApiClient(""), view);
wire(root, controller, view);
