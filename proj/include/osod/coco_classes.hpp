#pragma once

#include <array>
#include <string>
#include <vector>

#include "osod/common.hpp"

namespace osod {

struct CocoCategory {
  int id;
  const char* name;
};

// The standard 80-class detection taxonomy with its non-contiguous ids.
inline const std::array<CocoCategory, 80>& coco_categories() {
  static const std::array<CocoCategory, 80> table = {{
      {1, "person"},        {2, "bicycle"},      {3, "car"},
      {4, "motorcycle"},    {5, "airplane"},     {6, "bus"},
      {7, "train"},         {8, "truck"},        {9, "boat"},
      {10, "traffic light"}, {11, "fire hydrant"}, {13, "stop sign"},
      {14, "parking meter"}, {15, "bench"},      {16, "bird"},
      {17, "cat"},          {18, "dog"},         {19, "horse"},
      {20, "sheep"},        {21, "cow"},         {22, "elephant"},
      {23, "bear"},         {24, "zebra"},       {25, "giraffe"},
      {27, "backpack"},     {28, "umbrella"},    {31, "handbag"},
      {32, "tie"},          {33, "suitcase"},    {34, "frisbee"},
      {35, "skis"},         {36, "snowboard"},   {37, "sports ball"},
      {38, "kite"},         {39, "baseball bat"}, {40, "baseball glove"},
      {41, "skateboard"},   {42, "surfboard"},   {43, "tennis racket"},
      {44, "bottle"},       {46, "wine glass"},  {47, "cup"},
      {48, "fork"},         {49, "knife"},       {50, "spoon"},
      {51, "bowl"},         {52, "banana"},      {53, "apple"},
      {54, "sandwich"},     {55, "orange"},      {56, "broccoli"},
      {57, "carrot"},       {58, "hot dog"},     {59, "pizza"},
      {60, "donut"},        {61, "cake"},        {62, "chair"},
      {63, "couch"},        {64, "potted plant"}, {65, "bed"},
      {67, "dining table"}, {70, "toilet"},      {72, "tv"},
      {73, "laptop"},       {74, "mouse"},       {75, "remote"},
      {76, "keyboard"},     {77, "cell phone"},  {78, "microwave"},
      {79, "oven"},         {80, "toaster"},     {81, "sink"},
      {82, "refrigerator"}, {84, "book"},        {85, "clock"},
      {86, "vase"},         {87, "scissors"},    {88, "teddy bear"},
      {89, "hair drier"},   {90, "toothbrush"},
  }};
  return table;
}

// The 20 classes shared with the classic detection benchmark.
inline std::vector<int> voc_category_ids() {
  return {1, 2, 3, 4, 5, 6, 7, 9, 16, 17, 18, 19, 20, 21, 44, 62, 63, 64, 67, 72};
}

// Non-VOC classes in three 20-class groups (the incremental-task grouping).
inline std::vector<int> nonvoc_group_ids(int group) {
  switch (group) {
    case 1:  // remaining vehicles, outdoor, remaining animals, accessories, appliances
      return {8, 10, 11, 13, 14, 15, 22, 23, 24, 25,
              27, 28, 31, 32, 33, 78, 79, 80, 81, 82};
    case 2:  // sports, food
      return {34, 35, 36, 37, 38, 39, 40, 41, 42, 43,
              52, 53, 54, 55, 56, 57, 58, 59, 60, 61};
    case 3:  // electronics, indoor, kitchenware, remaining furniture
      return {46, 47, 48, 49, 50, 51, 65, 70, 73, 74,
              75, 76, 77, 84, 85, 86, 87, 88, 89, 90};
    default:
      break;
  }
  throw validation_error("nonvoc_group_ids: group must be 1, 2 or 3");
}

// Superclass-regrouped task classes: {19, 21, 20, 20} per task.
inline std::vector<int> superclass_task_ids(int task) {
  switch (task) {
    case 1:  // person, vehicles, animals
      return {1, 2, 3, 4, 5, 6, 7, 8, 9,
              16, 17, 18, 19, 20, 21, 22, 23, 24, 25};
    case 2:  // outdoor, accessories, appliances, furniture
      return {10, 11, 13, 14, 15, 27, 28, 31, 32, 33,
              78, 79, 80, 81, 82, 62, 63, 64, 65, 67, 70};
    case 3:  // sports, food
      return nonvoc_group_ids(2);
    case 4:  // electronics, indoor, kitchenware
      return {72, 73, 74, 75, 76, 77, 84, 85, 86, 87,
              88, 89, 90, 44, 46, 47, 48, 49, 50, 51};
    default:
      break;
  }
  throw validation_error("superclass_task_ids: task must be 1..4");
}

}  // namespace osod
