#pragma once

#include <string_view>

namespace geocot::prompts {

inline constexpr std::string_view kBasePrompt = R"GEOCOT(You are an expert in the field of remote sensing with strong reasoning abilities, capable of identifying, analyzing, and inferring information in remote sensing images. Now you need to help construct a CoT dataset in the field of remote sensing, to help other models think better. For each remote sensing image, utilize the provided auxiliary information to better understand the image. Now construct a detailed remote sensing TASK-CoT dataset.

For each sample, you will receive ** image **, ** auxiliary information **, ** question **, and** correct answer **. You need to carefully understand the ** image ** to facilitate the capture of key targets in the image by ** auxiliary information ** (Note: auxiliary information is correct, but may not be comprehensive, you need to combine it with your own understanding to identify all the information of the image). For the problem, fully understand the correct answer, and think of the solution path to the answer, integrating it into the general CoT from question to answer.

Importantly, auxiliary information is to help you understand the image and not let it appear in CoT. Even if you do not agree with certain viewpoints of the auxiliary information, you can ignore these viewpoints, but do not mention them in the CoT.

Note that the CoT should infer the answer from the problem, and the correct answer should not appear abruptly in advance. Therefore, statements such as 'this is consistent with the correct answer' should not be included in CoT.
The CoT should include a process of thinking and deduction, as well as a process of reflection. The CoT should naturally be divided into several segments, with each segment separated by a "\n\n\n".

Next, provide few examples of TASK-CoT.

{Task-specific exemplars}

Now, please construct a TASK-CoT for the input.
Please carefully examine the image, read and understand the question and correct answer, think carefully, deduce the thought process from question to answer, and organize it into a CoT presentation. The CoT format is { "CoT": "CoT content" }. Do not return any additional information.)GEOCOT";

inline constexpr std::string_view kCountingExemplars = R"GEOCOT(Next, provide two examples of count-CoT.

The first example for a smaller number of targets, maybe less than 8-10.

Input:
{
"question": "What is the amount of ship in the image? \nAnswer the question using a single word or phrase.",
"auxiliary information":{
    "image_size": [800,800],
    "objects": {
        "ship_position": [[612, 761], [628, 705], [657, 531]],
        "harbor_position": [[492, 715], [527, 504], [568, 8]]
    },
    "count": {
        "ship": 3,
        "harbor": 3
    }
},
"answer": "3",
}

Output:
{
    "CoT": "To determine the number of ships in the image, we begin by identifying the most likely locations for ships—typically near docks, piers, or water edges. This image shows a coastal residential area with multiple piers extending from private properties into the water.\n\n\nWe systematically analyze the image from top to bottom. The topmost dock has no visible ship. The second dock from the top clearly has a small white vessel at its end, identifiable by its sharp shape, white color, and shadow consistent with a boat. The third dock—closer to the bottom of the image—shows two vessels: a large white yacht with a visible bow and deck features, and a second boat partially covered with a blue tarp next to it.\n\n\nSo all the ship targets we found in the image are as follows: a small white vessel at the end of second dock, two vessols at the third dock—a large white yacht with a visible bow and deck features and a second boat partially covered with a blue tarp next to it.\n\n\n Now we cross-verify the water area away from the docks. No additional vessels are observed floating independently or anchored elsewhere. All identifiable ships are docked at the piers, suggesting no free-floating vessels.\n\n\nTo ensure accuracy, we reflect on the identification criteria of 'ship': the objects must have boat-like geometry, orientation on water, and features such as hulls, decks, or covers. All three identified objects meet this criterion. We do not count objects such as floating platforms or shadows as ships. Now, I can provide the amount of ships in the image."
}

The first example end.

The Second example is a larger number of targets, maybe more than 8-10.
For the large number of targets, The count-CoT should count by region, identify all regions in the image where targets exist, and provide **the exact number of targets in each region**, and finally count the number of targets.

Input:
{
  "question": "how many small-vehicles are there in the image?\nAnswer the question using a single word or phrase.",
  "auxiliary information": {
    "image_size": [800, 800],
    "objects": {
      "small-vehicle_position": [
        [695,365],[723,335],[752,307],[781,278],[796,162],
        [745,216],[770,188],[715,244],[329,791],[326,754],
        [664,395],[619,443],[584,479],[549,515],[519,546],
        [490,574],[462,605],[436,630],[408,660],[381,687],
        [352,688],[687,274],[660,302],[623,338],[596,364],
        [571,393],[540,423],[512,452],[484,482],[455,511],
        [427,539],[392,577],[361,607],[334,633],[263,695],
        [201,679],[168,666],[134,657],[89,652],[49,650],
        [12,656],[641,421]
      ],
      "swimming-pool_position": [[463,687]]
    },
    "count": { "small-vehicle": 42, "swimming-pool": 1 }
  },
  "answer": "42"
}

Output:
{
    "CoT": "To answer the question regarding the number of small vehicles in the image, I begin by carefully inspecting the urban area depicted in the satellite image. The term 'small-vehicle' generally refers to passenger cars or similar-sized transportation units, which typically appear on roads, in parking areas, or near residential and commercial buildings.\n\n\nScanning the image, I identify several regions where such vehicles are likely to be found. The straight road along the right edge of the image contains two dense row of parked vehicles aligned parallel to the curb. These vehicles are of consistent size and shape, suggesting they are indeed small vehicles. Carefully count their number as 17 vehicles above the road and 16 vehicles below the road. Additionally, more vehicles are visible around the curved road at the bottom-left portion of the image. I can count 9 vehicles at the cured road. I must also check for any vehicles near building entrances or driveways, as small vehicles might be parked or partially obscured there.\n\n\nSo all the ship targets we found in the image are as follows: 17 vehicles above the right road, 16 vehicles below the right road, 9 vehicles at the cured road.\n\n\nTo ensure completeness, I systematically count each visible vehicle in these areas. I mark each location where a vehicle is visible—most are clearly distinguishable by their rectangular shape, shadow pattern, and contrast with the road surface. Even in areas where vehicles are clustered or partially covered by trees or nearby structures, their general size and alignment help confirm their identity as small vehicles.\n\n\nAfter completing a detailed inspection and verification of all visible small vehicles in the image, I conclude the total number of small vehicles present. Now, I can provide the amount of small vehicles in the image."
}

The second example end.)GEOCOT";

inline constexpr std::string_view kCaptionExemplars = R"GEOCOT(Next, provide an example of caption-CoT.

Input:
{
"question": "Describe the image in detail.",
"auxiliary information": {
	"objects": [
        {
            "obj_id": 0,
            "referring_sentence": "The toll station is positioned at the center of the image.",
            "obj_cls": "expressway-toll-station",
            "obj_coord": [
                0.45,
                0.43,
                0.59,
                0.59
            ],
            "obj_position": "center",
            "obj_rel_position": "",
            "obj_size": "small",
            "obj_rel_size": "",
        },
        {
            "obj_id": 3,
            "referring_sentence": "The right-most small vehicle is located near the center, to the right of the toll station.",
            "obj_cls": "vehicle",
            "obj_coord": [
                0.58,
                0.44,
                0.62,
                0.47
            ],
            "obj_position": "center",
            "obj_rel_position": "right-most",
            "obj_size": "small",
            "obj_rel_size": "",
        }
    ]
},
"answer": "The image, sourced from GoogleEarth, shows a rural area with an expressway-toll-station situated at the center. Alongside the toll station, multiple small vehicles are visible, with one positioned on the middle-left and another that is the right-most in the center relative to the toll station.",
}

Output:
{
    "CoT": "To describe the image in detail, I begin by identifying key man-made structures and their surroundings. The image appears to be taken from a satellite or aerial perspective, capturing a segment of a road that intersects the center of the image. A distinctive blue-roofed structure is positioned along the road, which is indicative of a toll station, given its placement and function at a narrow point in the road. This structure is centrally located and stands out due to the contrast of its blue roof against the surrounding green terrain. \n\n\nNext, I observe the presence of several small vehicles on the road. These vehicles are distinguishable by their size and light-colored shapes. At least two vehicles are clearly visible: one is to the left of the toll station (middle-left in the image), and another is to the right of the toll station, as the right-most vehicle near the center. Their relative positions to the toll station confirm their function as vehicles in transit or waiting. \n\n\nAdditionally, below the toll station, there is a rectangular area containing a building with a red roof and surrounding features like shadows and parked cars, suggesting it is a nearby facility related to the toll station or local administration. The walls around this structure further support that this is a standalone, purpose-built building, likely a residential or administrative facility. \n\n\nConsidering the layout, objects, and spatial relationships, I deduce that this is a rural location due to the surrounding undeveloped green landscape and limited infrastructure. The toll station and vehicles are the primary indicators of human activity. After reflecting on the structures visible in the image, I conclude a comprehensive and detailed description must include these components—the rural environment, central toll station, nearby vehicles, and the presence of a building below the toll station. Now, I can provide a detailed description about this image. "
}

The example end.)GEOCOT";

inline constexpr std::string_view kDetectionExemplars = R"GEOCOT(Next, provide two examples of Object Detect-CoT.

The first example for a smaller number of targets, maybe less than 8-10.

Input:
{
    "question": "Detect all airplane in the image.",
    "answer": [[703,252,805,345],[835,487,985,582],[855,734,936,793]],
    "auxiliary information":{
        "objects": {
                "airplane": [[703,252,805,345],[835,487,985,582],[855,734,936,793]],
                "ground track field": [[38,11,383,394]]
            },
        "count": {
            "airplane": 3,
            "ground track field": 1
        }
    },
}

Output:
{
    "CoT": "To detect all airplanes in the image, we first need to understand the overall layout and characteristics of the scene. From a top-down perspective, the image appears to depict a large airport or airbase facility. On the right side of the image, there is a wide expanse of concrete consistent with an airport apron or taxiway, commonly used for aircraft parking, loading, and movement. The left portion of the image includes multiple buildings, greenery, and a ground track field, suggesting mixed-use infrastructure possibly associated with aviation operations or nearby institutional facilities.\n\n\nThe task is to locate all airplanes within the image. From a visual perspective, airplanes in satellite imagery are generally characterized by a fuselage, wings extending laterally, and sometimes visible tail sections or shadows. They are usually white or light gray and stand out against the concrete apron due to their shape and symmetry. \n\n\nCarefully scanning the apron area on the right side of the image, three distinct airplanes can be observed. The first airplane is near the top right quadrant of the apron, oriented roughly northwest to southeast. The second airplane is positioned slightly below center, larger in size, and is placed near the midsection of the apron. The third airplane is in the bottom right quadrant, near the edge of the apron area. These three objects clearly exhibit the typical geometry of airplanes when viewed from above and are isolated from other vehicles or structures, confirming their identification.\n\n\nAfter identifying and verifying the airplane locations, we convert their positions into coordinate ranges in the thousandths scale relative to the image dimensions. The bounding boxes for the airplanes are as follows: the first airplane is near the top right quadrant of the apron at [703,252,805,345], the second airplane is positioned slightly below center at [835,487,985,582], and the third airplane is in the bottom right quadrant at [855,734,936,793]. These coordinates accurately encompass the visual extents of each detected airplane. Thus, the image contains exactly three airplanes at these specified locations. Now I can provide the detection box for all airplanes in the image."
}

The first example end.

The Second example is a larger number of targets, maybe more than 8-10.
For the large number of targets, The Object Detect-CoT should count by region, identify all regions in the image where targets exist, and provide **the exact targets in each region**, and finally provide the detection box for all targets.

Input:
{
    "question": "Detect all small-vehicle in the image.",
    "auxiliary information":{
        "objects": {
                "small-vehicle": [
                    [182,325,205,338], [263,268,288,278],
                    [212,282,236,295], [100,806,123,828],
                    [791,122,812,141], [775,93,796,115],
                    [530,301,552,318], [341,81,358,102],
                    [592,295,620,315], [478,342,497,355],
                    [498,332,522,348], [52,296,78,313],
                    [132,258,161,271], [738,121,756,138],
                    [782,71,808,92]
                ],
                "storage-tank": [[317,5,387,65]]
            },
        "count": {
            "small-vehicle": 15,
            "storage-tank": 1
        }
    } ,
    "answer": [
            [182,325,205,338], [263,268,288,278], [212,282,236,295],
            [100,806,123,828], [791,122,812,141], [775,93,796,115],
            [530,301,552,318], [341,81,358,102], [592,295,620,315],
            [478,342,497,355], [498,332,522,348], [52,296,78,313],
            [132,258,161,271], [738,121,756,138], [782,71,808,92]
        ],
}

Output:
{
    "CoT": "To detect all small vehicles in the image, I begin by scanning the image systematically from top-left to bottom-right, focusing on regions that contain roads, intersections, or parking areas, as these are the most likely locations for small vehicles. In remote sensing imagery, small vehicles are typically identifiable by their small rectangular or oval shapes, high contrast with road surfaces, and regular spacing when parked.\n\n\nThe first noticeable region is near the top of the image, where a broad road runs horizontally across. Within this region, multiple small objects are visible that match the expected characteristics of small vehicles. These objects have rectangular shapes and are aligned along traffic lanes or parking areas. Carefully examining this section reveals multiple vehicles, including one near the center and two others slightly left and right. A curved structure is also visible, but it is not a vehicle, so I ignore it.\n\n\nNext, I look at the middle and lower-middle sections of the image. A prominent bright structure (possibly a roof or overpass) obscures part of the area, but beneath and around it, vehicles are visible. There are several parked or moving vehicles, particularly clustered near entrances and exits of adjacent roads. At least four vehicles are evident by their size, color contrast, and position relative to the road.\n\n\nThe lower-left section of the image contains another road with curved lanes and an exit area. Vehicles can be seen parked or moving along this segment as well. These vehicles are again identified by their compact shapes and positions aligned with road markings. A vehicle appears at the bottom left corner, and another is slightly above it.\n\n\nFinally, I inspect the far-right region and the top-right quadrant. This area includes a continuation of the road network, and I identify several more vehicles, particularly at intersections and nearby parking zones. These are less occluded and clearly match the known signature of small vehicles.\n\n\nIn total, I identify 15 small vehicles distributed across various regions of the image: Top central road region: 3 vehicles; Mid-upper right road network: 4 vehicles; Under the curved roof structure: 3 vehicles; Bottom-left road area: 2 vehicles; Bottom-central area: 1 vehicle; Upper-left road: 2 vehicles. Each of these vehicles is matched to a detection box based on their visible boundaries. After bounding each vehicle, I obtain the following bounding boxes:[[182, 325, 205, 338], [263, 268, 288, 278], [212, 282, 236, 295], [100, 806, 123, 828], [791, 122, 812, 141], [775, 93, 796, 115], [530, 301, 552, 318], [341, 81, 358, 102], [592, 295, 620, 315], [478, 342, 497, 355], [498, 332, 522, 348], [52, 296, 78, 313], [132, 258, 161, 271], [738, 121, 756, 138], [782, 71, 808, 92]]. Now I can provide the detection box for all small vehicles in the image."
}

The second example end.)GEOCOT";

inline constexpr std::string_view kVqaExemplars = R"GEOCOT(Next, provide an example of VQA-CoT.

Input:
{
    "question": "Are the vehicles predominantly parked on the left or right side of the image?",
    "answer": "left",
    "type": "object position",
    "auxiliary information":{
        "caption": "This high-resolution image from GoogleEarth depicts a parking area with several vehicles and distinguished by a combination of asphalt surfaces and surrounding greenery. In total, there are nine small vehicles, distributed in different positions throughout the image. Notable objects include trees casting shadows and a building located on the left side, indicating a semi-urban environment. All vehicles are parked, with many situated along the edges of the lot.",
        "objects": [
            {
                "obj_id": 4,
                "referring_sentence": "The vehicle located at the top-middle of the image.",
                "obj_cls": "vehicle",
                "obj_coord": [
                    0.52,
                    0,
                    0.55,
                    0.06
                ],
                "obj_position": "top-middle",
                "obj_rel_position": "top-most",
                "obj_size": "",
                "obj_rel_size": ""
            }
        ]
    }
},

Output: {
"CoT": "To determine whether the vehicles are predominantly parked on the left or right side of the image, we must first clearly define what constitutes the 'left' and 'right' regions. In this context, the image is oriented with the top representing the north, meaning the left and right refer to the western and eastern parts of the image, respectively.\n\n\nNext, I begin by visually scanning both sides of the image. I identify and count the number of parked vehicles on each side. On the left side of the image (the western half), I can observe several vehicles parked near the building and along the road. Specifically, there are 9 vehicles clearly visible parked in this region, of which 3 vehicles are next to buildings and 6 vehicles are on the road. On the right side (the eastern half), I observe significantly fewer vehicles, with only around 2 vehicles clearly parked, and possibly one more partially visible near the lower edge.\n\n\nHaving made these observations, I can now compare the counts. The left side shows a denser concentration of parked vehicles compared to the right. Moreover, the spatial distribution of these vehicles confirms this trend — the majority of parking appears clustered in the upper-left quadrant of the image, near the building and shaded area. The right side, in contrast, is more open and has fewer parked cars.\n\n\nTherefore, through a visual examination and vehicle count comparison across both sides of the image, I conclude that the vehicles are predominantly parked on the left side."
}

The example end.)GEOCOT";

inline constexpr std::string_view kClassificationExemplars = R"GEOCOT(Next, provide an example of Scene Classification-CoT.

Input:
{
    "question": "Classify the given image in one of the following classes. Classes: parking, baseballfield, school, resort, industrial, square, commercial, playground, port, mountain, forest, bareland, farmland, desert, denseresidential, airport, meadow, mediumresidential, center, storagetanks, park, bridge, church, pond, railwaystation, viaduct, stadium, beach, river, sparseresidential. \nAnswer in one word or a short phrase.",
    "answer": "airport",
}

Output:
{
    "CoT": "First, I observe the overall layout and features present in the image. The image shows a large built structure with a highly organized layout and multiple identical objects aligned along both sides of a central building. The structures extending from the central building resemble jet bridges or concourses, which are commonly found in airports for boarding and deplaning passengers from aircraft.\n\n\nNext, I examine the objects that are aligned with these structures. These appear to be commercial aircraft, identifiable by their wings, fuselage, and tail configurations. The high number of aircraft, their close positioning to the terminal building, and the presence of taxiways and runways strongly suggest that this location is used for air travel operations.\n\n\nI also notice a network of runways, taxiways, and apron areas typical of an airport's design. The large paved areas around the terminal allow for aircraft movement and parking. The presence of service roads, ground vehicles, and gate markings further reinforces this being an operational airport.\n\n\nGiven the presence of a terminal structure, multiple commercial aircraft, and surrounding airport infrastructure such as taxiways and aprons, the most fitting classification among the provided categories is airport."
}

The example end.)GEOCOT";

inline constexpr std::string_view kGroundingExemplars = R"GEOCOT(Next, provide an example of VG-CoT.

Input:
{
    "question": "where is the vehicle situated towards the bottom-right side of the image is on the road parallel to the overpass.",
    "answer": [790,820,820,860],
    "auxiliary information":{
        "caption": "This high-resolution image from GoogleEarth depicts a parking area with several vehicles and distinguished by a combination of asphalt surfaces and surrounding greenery. In total, there are nine small vehicles, distributed in different positions throughout the image. Notable objects include trees casting shadows and a building located on the left side, indicating a semi-urban environment. All vehicles are parked, with many situated along the edges of the lot.",
        "objects": [
            {
                "obj_id": 0,
                "referring_sentence": "The overpass runs diagonally across the image and casts a shadow to its right.",
                "obj_cls": "overpass",
                "obj_coord": [
                    390,
                    530,
                    1060,
                    960
                ],
                "obj_position": "",
                "obj_rel_position": "",
                "obj_size": "small",
                "obj_rel_size": ""
            },
            {
                "obj_id": 1,
                "referring_sentence": "The vehicle situated towards the bottom-right side of the image is on the road parallel to the overpass.",
                "obj_cls": "vehicle",
                "obj_coord": [
                    790,
                    820,
                    820,
                    860
                ],
                "obj_position": "bottom-right",
                "obj_rel_position": "",
                "obj_size": "small",
                "obj_rel_size": ""
            },
            {
                "obj_id": 2,
                "referring_sentence": "The vehicle located on the road below the overpass is near the bottom-middle of the image.",
                "obj_cls": "vehicle",
                "obj_coord": [
                    480,
                    790,
                    530,
                    830
                ],
                "obj_position": "bottom-middle",
                "obj_rel_position": "left-most",
                "obj_size": "small",
                "obj_rel_size": ""
            },
            {
                "obj_id": 3,
                "referring_sentence": "The vehicle on the road above the overpass is positioned towards the top-right of the image.",
                "obj_cls": "vehicle",
                "obj_coord": [
                    780,
                    280,
                    800,
                    320
                ],
                "obj_position": "top-right",
                "obj_rel_position": "top-most",
                "obj_size": "small",
                "obj_rel_size": ""
            }
        ]
    }
},

Output:
{
"CoT": "To address the question, I must first understand the spatial layout of the image. The question refers to a vehicle towards the bottom-right side of the image that is situated on a road running parallel to an overpass. This indicates a relationship between the location of the vehicle and the orientation of the overpass.\n\n\nUpon examining the image, I observe a large overpass running diagonally from the lower-left to the upper-right. The overpass crosses above two visible roadways, one above and one below it, each carrying vehicular traffic. The shadow of the overpass is cast to the right side, confirming the orientation.\n\n\nNext, I identify multiple vehicles in the image. The target vehicle must be towards the bottom-right of the image and located on a road that runs roughly in parallel to the overpass. Looking in the bottom-right quadrant of the image, I spot a small vehicle traveling along a lane that follows the same general diagonal direction as the overpass. This suggests the road is parallel to the overpass and supports the condition stated in the question.\n\n\nFinally, I verify that this vehicle's position aligns with the described location—bottom-right—and confirm it is situated on the correct road. This process ensures that my identification is accurate. Thus, the coordinates [790,820,820,860] correctly correspond to the vehicle referenced in the question."
}

The example end.)GEOCOT";

} // namespace geocot::prompts
